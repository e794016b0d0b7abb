#pragma once

#include <cstddef>
#include <vector>

#include "ebos/bos_physics.hpp"
#include "ebos/core.hpp"

namespace ebos {

struct Metrics {
  double aee = 0.0;      // px
  double pct_out = 0.0;  // percent of pixels with endpoint error > 1 px
  double ae = 0.0;       // rad
  std::size_t n_pixels = 0;
};

/// Pixels inside the ROI that received at least one event.
Mask event_mask(const EventStream& events, const Roi& roi);

/// AEE, %Out and AE over the mask. AE is the angle between (u, v, 1) vectors.
/// Throws ValidationError on an empty mask or mismatched resolutions.
Metrics compute_metrics(const VectorField& estimated, const VectorField& ground_truth, const Mask& mask);

/// Space-time image: row i holds one column of source i, so time runs down the rows.
struct Kymogram {
  ScalarField values;  // width = spatial samples, height = time samples
  int column = 0;
  int row_begin = 0;   // first source row included
  double rate = 0.0;   // rows per second
};

/// Stacks column `column`, rows [row_begin, row_end), of each source.
Kymogram build_kymogram(const std::vector<ScalarField>& sources, int column, int row_begin, int row_end, double rate);

/// Same as build_kymogram over per-bin event-count histograms, without materializing them.
/// Bin i covers [t0 + i / rate, t0 + (i + 1) / rate); the number of rows is floor((t1 - t0) * rate).
Kymogram build_event_kymogram(const EventStream& events, int column, int row_begin, int row_end, double rate,
                              TimeUs t0, TimeUs t1);

struct SlopeEstimate {
  int row0 = 0;              // patch origin in the kymogram
  int col0 = 0;
  double angle_deg = 0.0;    // tilt of the dominant streaks from the time axis
  double px_per_row = 0.0;   // tan(angle)
  double px_per_s = 0.0;
  double confidence = 0.0;   // peak-to-mean ratio of the angular response
};

struct SlopeSearch {
  double min_deg = -89.0;
  double max_deg = 89.0;
  double step_deg = 0.25;
};

/// Dominant streak slope of every full patch_size x patch_size tile of the kymogram.
///
/// Each tile is Gaussian-smoothed and differentiated (derivative-of-Gaussian filters).
/// For every candidate angle the response is the summed |gradient . normal| over the
/// inscribed disk, which is the spatial derivative of the tile rotated by that angle;
/// the disk keeps the sample set independent of the angle. The best angle is refined
/// by a parabola through its neighbors.
std::vector<SlopeEstimate> detect_slope(const Kymogram& kymo, int patch_size, double smoothing_sigma,
                                        const SlopeSearch& search = {});

/// Object-plane speed in m/s: slope * pixel_pitch * Z_A / f.
double velocity_from_slope(double px_per_s, const BosGeometry& geometry);

}  // namespace ebos
