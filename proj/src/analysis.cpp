#include "ebos/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ebos/error.hpp"
#include "ebos/event_ops.hpp"
#include "ebos/image_ops.hpp"

namespace ebos {

Mask event_mask(const EventStream& events, const Roi& roi) {
  const Resolution res = events.resolution();
  if (!roi.fits(res)) throw ValidationError("ROI " + to_string(roi) + " exceeds sensor " + to_string(res));
  Mask mask(res);
  for (const Event& e : events)
    if (roi.contains(e.x, e.y)) mask.set(e.x, e.y, true);
  return mask;
}

Metrics compute_metrics(const VectorField& est, const VectorField& gt, const Mask& mask) {
  if (!(est.resolution() == gt.resolution()) || !(est.resolution() == mask.resolution())) {
    throw ValidationError("metrics: flow and mask resolutions differ");
  }
  Metrics m;
  double sum_ee = 0.0, sum_ae = 0.0;
  std::size_t outliers = 0;
  const std::size_t n = est.u().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const double u1 = est.u()[i], v1 = est.v()[i];
    const double u2 = gt.u()[i], v2 = gt.v()[i];
    const double ee = std::hypot(u1 - u2, v1 - v2);
    const double cosine = (u1 * u2 + v1 * v2 + 1.0) / (std::sqrt(u1 * u1 + v1 * v1 + 1.0) * std::sqrt(u2 * u2 + v2 * v2 + 1.0));
    sum_ee += ee;
    sum_ae += std::acos(std::clamp(cosine, -1.0, 1.0));
    if (ee > 1.0) ++outliers;
    ++m.n_pixels;
  }
  if (m.n_pixels == 0) throw ValidationError("metrics: evaluation mask is empty");
  const double count = static_cast<double>(m.n_pixels);
  m.aee = sum_ee / count;
  m.ae = sum_ae / count;
  m.pct_out = 100.0 * static_cast<double>(outliers) / count;
  return m;
}

Kymogram build_kymogram(const std::vector<ScalarField>& sources, int column, int row_begin, int row_end, double rate) {
  if (sources.empty()) throw ValidationError("kymogram needs at least one source");
  const Resolution res = sources.front().resolution();
  if (column < 0 || column >= res.width) throw ValidationError("kymogram column out of bounds");
  if (row_begin < 0 || row_end > res.height || row_begin >= row_end) throw ValidationError("kymogram rows out of bounds");
  if (!(rate > 0)) throw ValidationError("kymogram rate must be positive");
  Kymogram k;
  k.column = column;
  k.row_begin = row_begin;
  k.rate = rate;
  k.values = ScalarField({row_end - row_begin, static_cast<int>(sources.size())});
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!(sources[i].resolution() == res)) throw ValidationError("kymogram sources differ in resolution");
    for (int r = row_begin; r < row_end; ++r) k.values(r - row_begin, static_cast<int>(i)) = sources[i](column, r);
  }
  return k;
}

Kymogram build_event_kymogram(const EventStream& events, int column, int row_begin, int row_end, double rate,
                              TimeUs t0, TimeUs t1) {
  const Resolution res = events.resolution();
  if (column < 0 || column >= res.width) throw ValidationError("kymogram column out of bounds");
  if (row_begin < 0 || row_end > res.height || row_begin >= row_end) throw ValidationError("kymogram rows out of bounds");
  if (!(rate > 0)) throw ValidationError("kymogram rate must be positive");
  if (t1 <= t0) throw ValidationError("kymogram time range is empty");
  const int rows = static_cast<int>(std::floor(to_seconds(t1 - t0) * rate + 1e-9));
  if (rows < 1) throw ValidationError("kymogram time range shorter than one row");
  Kymogram k;
  k.column = column;
  k.row_begin = row_begin;
  k.rate = rate;
  k.values = ScalarField({row_end - row_begin, rows});
  for (const Event& e : events) {
    if (e.x != column || e.y < row_begin || e.y >= row_end || e.t < t0) continue;
    const auto bin = static_cast<long long>(std::floor(to_seconds(e.t - t0) * rate));
    if (bin >= rows) continue;
    k.values(e.y - row_begin, static_cast<int>(bin)) += 1.0;
  }
  return k;
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Derivative-of-Gaussian gradient of a tile, kept inside its inscribed disk shrunk by the kernel reach
// so that reflected borders do not contribute.
struct DiskGradient {
  std::vector<double> gx, gy;
};

DiskGradient disk_gradient(const ScalarField& patch, double sigma) {
  const std::vector<double> g = gaussian_kernel(sigma);
  const int reach = static_cast<int>(g.size() / 2);
  std::vector<double> dg(g.size());
  double norm = 0.0;
  for (int i = -reach; i <= reach; ++i) {
    dg[i + reach] = i * g[i + reach];
    norm += i * i * g[i + reach];
  }
  for (double& v : dg) v /= norm;  // unit response to a unit ramp
  const ScalarField fx = convolve_separable(patch, dg, g);
  const ScalarField fy = convolve_separable(patch, g, dg);
  const int n = patch.width();
  const double c = 0.5 * (n - 1);
  const double radius = std::max(2.0, 0.5 * n - 1.0 - reach);
  DiskGradient d;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if ((x - c) * (x - c) + (y - c) * (y - c) > radius * radius) continue;
      d.gx.push_back(fx(x, y));
      d.gy.push_back(fy(x, y));
    }
  return d;
}

// Summed |derivative along the streak normal| for streaks tilted by `angle` (radians) from the time axis.
// Equals the spatial derivative of the tile rotated by `angle`, without resampling.
double rotated_response(const DiskGradient& d, double angle) {
  const double nx = std::cos(angle), ny = -std::sin(angle);
  double total = 0.0;
  for (std::size_t i = 0; i < d.gx.size(); ++i) total += std::abs(d.gx[i] * nx + d.gy[i] * ny);
  return total;
}

}  // namespace

std::vector<SlopeEstimate> detect_slope(const Kymogram& kymo, int patch_size, double smoothing_sigma,
                                        const SlopeSearch& search) {
  const int cols = kymo.values.width();
  const int rows = kymo.values.height();
  if (patch_size < 5) throw ValidationError("slope patch size must be at least 5");
  if (patch_size > cols || patch_size > rows) {
    throw ValidationError("slope patch " + std::to_string(patch_size) + " exceeds kymogram " + to_string(kymo.values.resolution()));
  }
  if (!(search.step_deg > 0) || search.min_deg > search.max_deg) throw ValidationError("invalid slope search range");

  std::vector<double> angles;
  for (double a = search.min_deg; a <= search.max_deg + 1e-9; a += search.step_deg) angles.push_back(a);

  std::vector<SlopeEstimate> out;
  for (int r0 = 0; r0 + patch_size <= rows; r0 += patch_size) {
    for (int c0 = 0; c0 + patch_size <= cols; c0 += patch_size) {
      const DiskGradient grad = disk_gradient(crop(kymo.values, {c0, r0, patch_size, patch_size}), smoothing_sigma);
      std::vector<double> response(angles.size());
      double sum = 0.0;
      std::size_t best = 0;
      for (std::size_t i = 0; i < angles.size(); ++i) {
        response[i] = rotated_response(grad, angles[i] * kDeg);
        sum += response[i];
        if (response[i] > response[best]) best = i;
      }
      double angle = angles[best];
      if (response[best] <= 0.0) {
        angle = 0.0;  // featureless tile: no streaks to follow
      } else if (best > 0 && best + 1 < angles.size()) {
        const double ym = response[best - 1], y0 = response[best], yp = response[best + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0) angle += 0.5 * (ym - yp) / denom * search.step_deg;
      }
      SlopeEstimate s;
      s.row0 = r0;
      s.col0 = c0;
      s.angle_deg = angle;
      s.px_per_row = std::tan(angle * kDeg);
      s.px_per_s = s.px_per_row * kymo.rate;
      const double mean = sum / static_cast<double>(angles.size());
      s.confidence = mean > 0 ? response[best] / mean : 0.0;
      out.push_back(s);
    }
  }
  return out;
}

double velocity_from_slope(double px_per_s, const BosGeometry& geometry) {
  geometry.validate();
  return px_per_s * geometry.pixel_pitch * geometry.lens_to_object / geometry.focal_length;
}

}  // namespace ebos
