#include "ebos/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ebos/error.hpp"

namespace ebos::io {

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr std::array<char, 8> kEventMagic{'E', 'V', 'B', 'O', 'S', '\0', '\0', '\1'};
constexpr std::array<char, 8> kScalarMagic{'E', 'B', 'O', 'S', 'F', '6', '4', '\0'};

std::string describe(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + describe(path) + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + describe(path));
  return bytes;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + describe(path) + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + describe(path));
}

class Writer {
 public:
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes.insert(bytes.end(), p, p + n); }

  std::vector<std::uint8_t> bytes;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, const fs::path& path) : b_(bytes), path_(path) {}

  std::uint64_t uint(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(uint(4))); }
  double f64() { return std::bit_cast<double>(uint(8)); }
  bool matches(const std::array<char, 8>& magic) {
    if (remaining() < 8) return false;
    const bool ok = std::memcmp(&b_[pos_], magic.data(), 8) == 0;
    pos_ += 8;
    return ok;
  }
  std::size_t remaining() const { return b_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) throw IoError("truncated file " + describe(path_));
  }

 private:
  const std::vector<std::uint8_t>& b_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

Resolution checked_resolution(std::uint64_t w, std::uint64_t h, const fs::path& path) {
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) {
    throw IoError("implausible resolution " + std::to_string(w) + "x" + std::to_string(h) + " in " + describe(path));
  }
  return {static_cast<int>(w), static_cast<int>(h)};
}

bool has_text_extension(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".csv" || ext == ".txt";
}

// Whitespace/comment-aware token reader for Netpbm headers.
struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::vector<std::uint8_t>& b, const fs::path& path) {
  std::size_t i = 0;
  auto token = [&]() {
    while (i < b.size()) {
      if (b[i] == '#') {
        while (i < b.size() && b[i] != '\n') ++i;
      } else if (std::isspace(b[i])) {
        ++i;
      } else {
        break;
      }
    }
    std::string t;
    while (i < b.size() && !std::isspace(b[i]) && b[i] != '#') t.push_back(static_cast<char>(b[i++]));
    if (t.empty()) throw IoError("truncated header in " + describe(path));
    return t;
  };
  auto number = [&]() {
    const std::string t = token();
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v <= 0) throw IoError("bad header field in " + describe(path));
    return v;
  };
  PnmHeader h;
  h.magic = token();
  h.width = number();
  h.height = number();
  h.maxval = number();
  if (i >= b.size() || !std::isspace(b[i])) throw IoError("bad header terminator in " + describe(path));
  h.data_offset = i + 1;
  return h;
}

}  // namespace

void write_flo(const fs::path& path, const VectorField& flow) {
  Writer w;
  w.f32(kFloMagic);
  w.u32(static_cast<std::uint32_t>(flow.width()));
  w.u32(static_cast<std::uint32_t>(flow.height()));
  for (std::size_t i = 0; i < flow.u().size(); ++i) {
    w.f32(static_cast<float>(flow.u()[i]));
    w.f32(static_cast<float>(flow.v()[i]));
  }
  write_bytes(path, w.bytes);
}

VectorField read_flo(const fs::path& path) {
  const auto bytes = read_bytes(path);
  Reader r(bytes, path);
  if (r.f32() != kFloMagic) throw IoError("not a .flo file: " + describe(path));
  const std::uint64_t w = r.uint(4), h = r.uint(4);
  const Resolution res = checked_resolution(w, h, path);
  if (r.remaining() != res.pixels() * 8) throw IoError("size mismatch in " + describe(path));
  ScalarField u(res), v(res);
  for (std::size_t i = 0; i < res.pixels(); ++i) {
    u[i] = r.f32();
    v[i] = r.f32();
  }
  return VectorField(std::move(u), std::move(v));
}

void write_events_text(const fs::path& path, const EventStream& events) {
  std::string s = "t_us,x,y,p\n";
  s.reserve(s.size() + events.size() * 20);
  for (const Event& e : events) {
    s += std::to_string(e.t);
    s += ',';
    s += std::to_string(e.x);
    s += ',';
    s += std::to_string(e.y);
    s += ',';
    s += std::to_string(e.polarity);
    s += '\n';
  }
  write_text(path, s);
}

EventStream read_events_text(const fs::path& path, std::optional<Resolution> resolution) {
  const std::string text = read_text(path);
  std::vector<Event> raw;
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "t_us,x,y,p") throw IoError("missing header 't_us,x,y,p' in " + describe(path));
      header_seen = true;
      continue;
    }
    long long f[4];
    const char* p = line.data();
    const char* stop = line.data() + line.size();
    for (int k = 0; k < 4; ++k) {
      auto [next, ec] = std::from_chars(p, stop, f[k]);
      if (ec != std::errc() || (k < 3 ? (next == stop || *next != ',') : next != stop)) {
        throw IoError("malformed event on line " + std::to_string(line_no) + " of " + describe(path));
      }
      p = next + 1;
    }
    if (f[1] < 0 || f[2] < 0 || f[1] > 65535 || f[2] > 65535) {
      throw ValidationError("negative or oversized coordinate on line " + std::to_string(line_no) + " of " +
                            describe(path));
    }
    raw.push_back({static_cast<int>(f[1]), static_cast<int>(f[2]), f[0], static_cast<int>(f[3])});
  }
  if (!header_seen) throw IoError("empty event file " + describe(path));
  Resolution res;
  if (resolution) {
    res = *resolution;
  } else {
    for (const Event& e : raw) res = {std::max(res.width, e.x + 1), std::max(res.height, e.y + 1)};
    if (res.empty()) res = {1, 1};
  }
  StreamValidation v = validate_stream(raw, res);
  if (!v.ok()) throw ValidationError(describe(path) + ": " + v.report());
  return std::move(v.stream);
}

void write_events_binary(const fs::path& path, const EventStream& events) {
  Writer w;
  w.raw(kEventMagic.data(), 8);
  w.u32(static_cast<std::uint32_t>(events.resolution().width));
  w.u32(static_cast<std::uint32_t>(events.resolution().height));
  w.bytes.reserve(16 + events.size() * 16);
  for (const Event& e : events) {
    w.u64(static_cast<std::uint64_t>(e.t));
    w.u16(static_cast<std::uint16_t>(e.x));
    w.u16(static_cast<std::uint16_t>(e.y));
    w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(e.polarity)));
    w.u8(0);
    w.u8(0);
    w.u8(0);
  }
  write_bytes(path, w.bytes);
}

EventStream read_events_binary(const fs::path& path) {
  const auto bytes = read_bytes(path);
  Reader r(bytes, path);
  if (!r.matches(kEventMagic)) throw IoError("not a binary event file: " + describe(path));
  const std::uint64_t w = r.uint(4), h = r.uint(4);
  const Resolution res = checked_resolution(w, h, path);
  if (r.remaining() % 16 != 0) throw IoError("trailing partial record in " + describe(path));
  std::vector<Event> raw(r.remaining() / 16);
  for (Event& e : raw) {
    const std::uint64_t t = r.uint(8);
    if (t > static_cast<std::uint64_t>(INT64_MAX)) throw IoError("timestamp overflow in " + describe(path));
    e.t = static_cast<TimeUs>(t);
    e.x = static_cast<int>(r.uint(2));
    e.y = static_cast<int>(r.uint(2));
    e.polarity = static_cast<std::int8_t>(static_cast<std::uint8_t>(r.uint(1)));
    r.uint(3);
  }
  StreamValidation v = validate_stream(raw, res);
  if (!v.ok()) throw ValidationError(describe(path) + ": " + v.report());
  return std::move(v.stream);
}

void write_events(const fs::path& path, const EventStream& events) {
  if (has_text_extension(path)) {
    write_events_text(path, events);
  } else {
    write_events_binary(path, events);
  }
}

EventStream read_events(const fs::path& path, std::optional<Resolution> resolution) {
  if (has_text_extension(path)) return read_events_text(path, resolution);
  EventStream s = read_events_binary(path);
  if (resolution && !(s.resolution() == *resolution)) {
    throw ValidationError(describe(path) + " has resolution " + to_string(s.resolution()) + ", expected " +
                          to_string(*resolution));
  }
  return s;
}

void write_pgm16(const fs::path& path, const ScalarField& image) {
  Writer w;
  const std::string header = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n65535\n";
  w.raw(header.data(), header.size());
  for (double v : image.values()) {
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
    w.u8(static_cast<std::uint8_t>(q >> 8));  // Netpbm samples are big-endian
    w.u8(static_cast<std::uint8_t>(q & 0xff));
  }
  write_bytes(path, w.bytes);
}

ScalarField read_pgm16(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P5") throw IoError("not a binary PGM: " + describe(path));
  const Resolution res = checked_resolution(h.width, h.height, path);
  const int bpp = h.maxval > 255 ? 2 : 1;
  if (h.maxval > 65535) throw IoError("unsupported maxval in " + describe(path));
  if (bytes.size() - h.data_offset != res.pixels() * bpp) throw IoError("size mismatch in " + describe(path));
  ScalarField out(res);
  const std::uint8_t* p = bytes.data() + h.data_offset;
  for (std::size_t i = 0; i < res.pixels(); ++i) {
    const unsigned v = bpp == 2 ? (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
    out[i] = static_cast<double>(v) / h.maxval;
  }
  return out;
}

void write_scalar(const fs::path& path, const ScalarField& field) {
  Writer w;
  w.raw(kScalarMagic.data(), 8);
  w.u32(static_cast<std::uint32_t>(field.width()));
  w.u32(static_cast<std::uint32_t>(field.height()));
  for (double v : field.values()) w.f64(v);
  write_bytes(path, w.bytes);
}

ScalarField read_scalar(const fs::path& path) {
  const auto bytes = read_bytes(path);
  Reader r(bytes, path);
  if (!r.matches(kScalarMagic)) throw IoError("not a float64 field file: " + describe(path));
  const std::uint64_t w = r.uint(4), h = r.uint(4);
  const Resolution res = checked_resolution(w, h, path);
  if (r.remaining() != res.pixels() * 8) throw IoError("size mismatch in " + describe(path));
  ScalarField out(res);
  for (double& v : out.values()) v = r.f64();
  return out;
}

void write_ppm(const fs::path& path, const RgbImage& image) {
  Writer w;
  const std::string header =
      "P6\n" + std::to_string(image.resolution.width) + " " + std::to_string(image.resolution.height) + "\n255\n";
  w.raw(header.data(), header.size());
  w.bytes.insert(w.bytes.end(), image.pixels.begin(), image.pixels.end());
  write_bytes(path, w.bytes);
}

RgbImage read_ppm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P6" || h.maxval != 255) throw IoError("not an 8-bit binary PPM: " + describe(path));
  RgbImage img(checked_resolution(h.width, h.height, path));
  if (bytes.size() - h.data_offset != img.pixels.size()) throw IoError("size mismatch in " + describe(path));
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset), bytes.end(), img.pixels.begin());
  return img;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + describe(path) + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + describe(path));
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + describe(dir) + ": " + ec.message());
}

}  // namespace ebos::io
