#include "ebos/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ebos/bos_physics.hpp"
#include "ebos/error.hpp"
#include "ebos/image_ops.hpp"

namespace ebos {

void SimConfig::validate() const {
  if (!(contrast_pos > 0) || !(contrast_neg > 0)) throw ValidationError("contrast thresholds must be positive");
  if (refractory < 0) throw ValidationError("refractory period must be non-negative");
  if (!(fps > 0)) throw ValidationError("fps must be positive");
  if (!(dot_density >= 0 && dot_density < 1)) throw ValidationError("dot_density must lie in [0, 1)");
  if (!(dot_radius > 0)) throw ValidationError("dot_radius must be positive");
  if (!(log_offset > 0)) throw ValidationError("log_offset must be positive");
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ScalarField render_background(Resolution res, double dot_density, double dot_radius, std::uint64_t seed) {
  if (res.empty()) throw ValidationError("background resolution is empty");
  if (!(dot_density >= 0 && dot_density < 1) || !(dot_radius > 0)) {
    throw ValidationError("invalid dot parameters");
  }
  std::mt19937_64 rng(seed);
  const auto dots = static_cast<std::size_t>(std::llround(dot_density * static_cast<double>(res.pixels())));
  ScalarField coverage(res);
  for (std::size_t d = 0; d < dots; ++d) {
    const double cx = unit_uniform(rng) * res.width - 0.5;
    const double cy = unit_uniform(rng) * res.height - 0.5;
    const int reach = static_cast<int>(std::ceil(dot_radius + 0.5));
    const int x_lo = std::max(0, static_cast<int>(std::floor(cx)) - reach);
    const int x_hi = std::min(res.width - 1, static_cast<int>(std::ceil(cx)) + reach);
    const int y_lo = std::max(0, static_cast<int>(std::floor(cy)) - reach);
    const int y_hi = std::min(res.height - 1, static_cast<int>(std::ceil(cy)) + reach);
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double dist = std::hypot(x - cx, y - cy);
        const double c = std::clamp(dot_radius + 0.5 - dist, 0.0, 1.0);
        coverage(x, y) = std::max(coverage(x, y), c);
      }
    }
  }
  ScalarField out(res);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 - (1.0 - kDotIntensity) * coverage[i];
  return out;
}

ScalarField warp_frame(const ScalarField& frame, const VectorField& d) {
  if (!(frame.resolution() == d.resolution())) throw ValidationError("warp_frame: resolutions differ");
  ScalarField out(frame.resolution());
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) {
      const Vec2 s = d(x, y);
      out(x, y) = sample_bilinear(frame, x - s.x, y - s.y).value;
    }
  return out;
}

int frame_count(double duration, double fps) {
  if (!(duration > 0)) return 0;
  return std::max(2, static_cast<int>(std::floor(duration * fps + 1e-9)));
}

TimeUs frame_time(int index, double fps) { return static_cast<TimeUs>(std::llround(index * 1e6 / fps)); }

SyntheticScene synth_scene(const ScalarField& background, const ScalarSource& source, double duration, double fps,
                           double peak_displacement) {
  if (!(fps > 0)) throw ValidationError("fps must be positive");
  if (!(peak_displacement >= 0)) throw ValidationError("peak displacement must be non-negative");
  const int n = frame_count(duration, fps);
  const Resolution res = background.resolution();

  std::vector<ScalarField> sources;
  std::vector<VectorField> raw;
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    ScalarField q = source(frame_time(i, fps) * 1e-6);
    if (!(q.resolution() == res)) throw ValidationError("source resolution does not match background");
    VectorField g = gradient_of_scalar(q);
    for (std::size_t k = 0; k < q.size(); ++k) peak = std::max(peak, std::hypot(g.u()[k], g.v()[k]));
    sources.push_back(std::move(q));
    raw.push_back(std::move(g));
  }

  SyntheticScene scene;
  scene.scale = peak > 0 ? peak_displacement / peak : 0.0;
  for (int i = 0; i < n; ++i) {
    VectorField d = raw[i];
    for (double& x : d.u().values()) x *= scene.scale;
    for (double& x : d.v().values()) x *= scene.scale;
    scene.frames.push_back({frame_time(i, fps), warp_frame(background, d)});
    scene.displacements.push_back(std::move(d));
  }
  for (int i = 0; i + 1 < n; ++i) {
    VectorField flow(res);
    ScalarField dq(res);
    for (std::size_t k = 0; k < dq.size(); ++k) {
      flow.u()[k] = scene.displacements[i + 1].u()[k] - scene.displacements[i].u()[k];
      flow.v()[k] = scene.displacements[i + 1].v()[k] - scene.displacements[i].v()[k];
      dq[k] = scene.scale * (sources[i + 1][k] - sources[i][k]);
    }
    scene.gt_flows.push_back(std::move(flow));
    scene.gt_q.push_back(std::move(dq));
  }
  return scene;
}

ScalarSource plume_source(Resolution res, const PlumeConfig& config) {
  struct Blob {
    double x, y, amplitude, phase;
  };
  std::mt19937_64 rng(config.seed);
  std::vector<Blob> blobs;
  for (int b = 0; b < config.blobs; ++b) {
    Blob blob;
    blob.x = unit_uniform(rng) * res.width;
    blob.y = unit_uniform(rng) * res.height;
    blob.amplitude = unit_uniform(rng) < 0.5 ? -1.0 : 1.0;
    blob.phase = 2.0 * std::numbers::pi * unit_uniform(rng);
    blobs.push_back(blob);
  }
  const double margin = 3.0 * config.blob_sigma;
  return [=](double t) {
    ScalarField q(res);
    const double inv2s2 = 1.0 / (2.0 * config.blob_sigma * config.blob_sigma);
    for (const Blob& b : blobs) {
      // Positions wrap on a domain padded by the blob reach so blobs re-enter from the far side.
      const double span_x = res.width + 2 * margin;
      const double span_y = res.height + 2 * margin;
      double cx = std::fmod(b.x + config.velocity_x * t + margin, span_x);
      double cy = std::fmod(b.y + config.velocity_y * t + margin, span_y);
      if (cx < 0) cx += span_x;
      if (cy < 0) cy += span_y;
      cx -= margin;
      cy -= margin;
      const double a =
          b.amplitude * (1.0 + config.modulation * std::sin(2.0 * std::numbers::pi * config.modulation_hz * t + b.phase));
      for (int y = 0; y < res.height; ++y)
        for (int x = 0; x < res.width; ++x) {
          const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          q(x, y) += a * std::exp(-r2 * inv2s2);
        }
    }
    return q;
  };
}

EventStream simulate_events(const FrameSequence& frames, const SimConfig& config) {
  config.validate();
  if (frames.size() < 2) throw ValidationError("event simulation needs at least two frames");
  const Resolution res = frames.front().image.resolution();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].t <= frames[i - 1].t) {
      throw ValidationError("frame timestamps must increase strictly (frame " + std::to_string(i) + ")");
    }
    if (!(frames[i].image.resolution() == res)) throw ValidationError("frames differ in resolution");
  }

  const std::size_t n = res.pixels();
  auto to_log = [&](const ScalarField& f, std::vector<double>& out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = std::log(std::max(f[k], 0.0) + config.log_offset);
  };
  std::vector<double> prev(n), next(n);
  to_log(frames.front().image, prev);
  std::vector<double> reference = prev;
  std::vector<TimeUs> last_event(n, -1);

  std::vector<Event> all;
  std::vector<Event> segment;
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    to_log(frames[i + 1].image, next);
    const double t_start = static_cast<double>(frames[i].t);
    const double span = static_cast<double>(frames[i + 1].t - frames[i].t);
    segment.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const double l0 = prev[k];
      const double l1 = next[k];
      if (l1 == l0) continue;
      const int pol = l1 > l0 ? 1 : -1;
      const double step = pol > 0 ? config.contrast_pos : config.contrast_neg;
      const int x = static_cast<int>(k % static_cast<std::size_t>(res.width));
      const int y = static_cast<int>(k / static_cast<std::size_t>(res.width));
      while (true) {
        const double level = reference[k] + pol * step;
        if (pol > 0 ? level > l1 : level < l1) break;
        reference[k] = level;
        const TimeUs t = static_cast<TimeUs>(std::llround(t_start + (level - l0) / (l1 - l0) * span));
        if (last_event[k] >= 0 && t - last_event[k] < config.refractory) continue;
        last_event[k] = t;
        segment.push_back({x, y, t, pol});
      }
    }
    std::stable_sort(segment.begin(), segment.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    all.insert(all.end(), segment.begin(), segment.end());
    std::swap(prev, next);
  }
  return EventStream(std::move(all), res);
}

}  // namespace ebos
