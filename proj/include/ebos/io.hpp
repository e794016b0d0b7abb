#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ebos/core.hpp"

namespace ebos::io {

namespace fs = std::filesystem;

// All formats are little-endian regardless of host. Failures throw IoError naming the path.

/// Middlebury .flo: float 202021.25, int32 width, int32 height, then interleaved (u, v) float32 rows.
/// Values are narrowed to float on write.
void write_flo(const fs::path& path, const VectorField& flow);
VectorField read_flo(const fs::path& path);

/// Text events: header `t_us,x,y,p`, one event per line.
void write_events_text(const fs::path& path, const EventStream& events);
/// The text format has no resolution; pass it, or it is taken as (max x + 1, max y + 1).
EventStream read_events_text(const fs::path& path, std::optional<Resolution> resolution = std::nullopt);

/// Binary events: magic "EVBOS\0\0\1", uint32 width, uint32 height, then 16-byte records
/// (uint64 t_us, uint16 x, uint16 y, int8 p, 3 zero bytes).
void write_events_binary(const fs::path& path, const EventStream& events);
EventStream read_events_binary(const fs::path& path);

/// Chooses the format by extension: .csv/.txt are text, anything else binary.
void write_events(const fs::path& path, const EventStream& events);
EventStream read_events(const fs::path& path, std::optional<Resolution> resolution = std::nullopt);

/// Binary 16-bit PGM (maxval 65535). Intensities in [0, 1] are clamped and rounded.
void write_pgm16(const fs::path& path, const ScalarField& image);
ScalarField read_pgm16(const fs::path& path);

/// Raw float64 field: 8-byte magic "EBOSF64\0", uint32 width, uint32 height, row-major values.
void write_scalar(const fs::path& path, const ScalarField& field);
ScalarField read_scalar(const fs::path& path);

struct RgbImage {
  Resolution resolution;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  explicit RgbImage(Resolution r = {}) : resolution(r), pixels(r.pixels() * 3, 0) {}
  std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * resolution.width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const {
    return &pixels[(static_cast<std::size_t>(y) * resolution.width + x) * 3];
  }
};

/// Binary PPM (P6, maxval 255).
void write_ppm(const fs::path& path, const RgbImage& image);
RgbImage read_ppm(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

/// Creates the directory (and parents) or throws IoError.
void ensure_directory(const fs::path& dir);

}  // namespace ebos::io
