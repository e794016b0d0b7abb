#include "ebos/event_ops.hpp"

#include <algorithm>
#include <cmath>

#include "ebos/error.hpp"
#include "ebos/image_ops.hpp"

namespace ebos {

IncrementImage accumulate_increment(const EventStream& events, double contrast, Resolution resolution) {
  if (!(contrast > 0.0)) throw ValidationError("contrast sensitivity must be positive");
  if (!(events.resolution() == resolution) && !events.empty()) {
    throw ValidationError("event stream resolution " + to_string(events.resolution()) +
                          " does not match requested " + to_string(resolution));
  }
  // Integer polarity sums first so the result is exactly C * sum(p).
  std::vector<long long> sums(resolution.pixels(), 0);
  for (const Event& e : events) sums[static_cast<std::size_t>(e.y) * resolution.width + e.x] += e.polarity;

  IncrementImage out;
  out.field = ScalarField(resolution);
  for (std::size_t i = 0; i < sums.size(); ++i) out.field[i] = contrast * static_cast<double>(sums[i]);
  out.contrast = contrast;
  if (!events.empty()) {
    out.t0 = events.events().front().t;
    out.t1 = events.events().back().t + 1;
  }
  return out;
}

ScalarField gaussian_smooth(const ScalarField& field, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  return convolve_separable(field, taps, taps);
}

ScalarField event_density(const EventStream& events, double sigma, Resolution resolution) {
  ScalarField counts(resolution);
  for (const Event& e : events) counts(e.x, e.y) += 1.0;
  ScalarField h = gaussian_smooth(counts, sigma);
  double peak = 0.0;
  for (double v : h.values()) peak = std::max(peak, v);
  if (peak <= 0.0) return ScalarField(resolution);
  for (double& v : h.values()) v = std::clamp(v / peak, 0.0, 1.0);
  return h;
}

ScalarField weight_map(const ScalarField& density, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ValidationError("weight-map alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
  ScalarField w(density.resolution());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 - alpha * density[i];
  return w;
}

WarpedEvents warp_events(const EventStream& events, const VectorField& flow, TimeUs t_ref) {
  if (!(flow.resolution() == events.resolution())) {
    throw ValidationError("flow resolution " + to_string(flow.resolution()) + " does not match events " +
                          to_string(events.resolution()));
  }
  const Resolution res = events.resolution();
  WarpedEvents out;
  std::vector<Event> moved;
  moved.reserve(events.size());
  for (const Event& e : events) {
    const double dt = to_seconds(e.t - t_ref);
    const Vec2 v = flow(e.x, e.y);
    const int nx = static_cast<int>(std::lround(e.x - v.x * dt));
    const int ny = static_cast<int>(std::lround(e.y - v.y * dt));
    if (!res.contains(nx, ny)) {
      ++out.dropped;
      continue;
    }
    moved.push_back({nx, ny, e.t, e.polarity});
  }
  out.stream = EventStream(std::move(moved), res);
  return out;
}

}  // namespace ebos
