#include "ebos/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ebos/bos_physics.hpp"
#include "ebos/error.hpp"
#include "ebos/event_ops.hpp"
#include "ebos/image_ops.hpp"

namespace ebos {

std::string to_string(Parameterization p) { return p == Parameterization::poisson ? "poisson" : "flow"; }

Parameterization parse_parameterization(const std::string& text) {
  if (text == "poisson") return Parameterization::poisson;
  if (text == "flow") return Parameterization::flow;
  throw ValidationError("unknown parameterization '" + text + "' (expected poisson or flow)");
}

void EstimatorConfig::validate() const {
  if (!(lambda1 >= 0) || !(lambda2 >= 0)) throw ValidationError("lambda1 and lambda2 must be non-negative");
  if (!(alpha >= 0 && alpha < 1)) throw ValidationError("alpha must lie in [0, 1)");
  if (!(sigma_increment > 0) || !(sigma_density > 0)) throw ValidationError("smoothing sigmas must be positive");
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (levels < 1 || levels > 30) throw ValidationError("levels must be in [1, 30]");
  if (coarsest_patch < 1 || (coarsest_patch % (1 << (levels - 1))) != 0) {
    throw ValidationError("coarsest_patch must be a positive multiple of 2^(levels-1)");
  }
  if (!(lr > 0) || !(lr_decay > 0)) throw ValidationError("lr and lr_decay must be positive");
  if (!(window > 0)) throw ValidationError("window must be positive");
  if (!(contrast > 0)) throw ValidationError("contrast must be positive");
  if (!(log_offset > 0)) throw ValidationError("log_offset must be positive");
}

TimeUs EstimatorConfig::window_us() const { return static_cast<TimeUs>(std::llround(window * 1e6)); }

Resolution grid_resolution(Resolution image, int patch_size) {
  return {(image.width + patch_size - 1) / patch_size, (image.height + patch_size - 1) / patch_size};
}

ParamGrid ParamGrid::zeros(Resolution image, int patch_size, int channels, int level) {
  ParamGrid g;
  g.level = level;
  g.patch_size = patch_size;
  g.grid = grid_resolution(image, patch_size);
  g.channels = channels;
  g.values.assign(g.grid.pixels() * static_cast<std::size_t>(channels), 0.0);
  return g;
}

std::span<double> ParamGrid::channel_values(int c) {
  return std::span<double>(values).subspan(static_cast<std::size_t>(c) * grid.pixels(), grid.pixels());
}

std::span<const double> ParamGrid::channel_values(int c) const {
  return std::span<const double>(values).subspan(static_cast<std::size_t>(c) * grid.pixels(), grid.pixels());
}

ScalarField ParamGrid::channel(int c) const {
  const auto span = channel_values(c);
  return ScalarField(grid, std::vector<double>(span.begin(), span.end()));
}

namespace {

// Pixel -> patch-grid coordinate along one axis.
double grid_coordinate(double pixel, int patch_size, int cells) {
  const double g = (pixel + 0.5) / patch_size - 0.5;
  return std::clamp(g, 0.0, static_cast<double>(cells - 1));
}

struct AxisInterp {
  std::vector<int> i0;
  std::vector<int> i1;
  std::vector<double> a;

  AxisInterp(int pixels, int cells, int patch_size) : i0(pixels), i1(pixels), a(pixels) {
    for (int x = 0; x < pixels; ++x) {
      const double g = grid_coordinate(x, patch_size, cells);
      int lo = static_cast<int>(std::floor(g));
      if (lo >= cells - 1) {
        i0[x] = i1[x] = cells - 1;
        a[x] = 0.0;
      } else {
        i0[x] = lo;
        i1[x] = lo + 1;
        a[x] = g - lo;
      }
    }
  }
};

// Separable bilinear upsampling from a patch grid to pixels, and its adjoint.
class Upsampler {
 public:
  Upsampler(Resolution image, Resolution grid, int patch_size)
      : image_(image), grid_(grid), ax_(image.width, grid.width, patch_size), ay_(image.height, grid.height, patch_size),
        rows_(static_cast<std::size_t>(grid.height) * image.width) {}

  void apply(std::span<const double> g, std::span<double> out) {
    const int w = image_.width;
    for (int gy = 0; gy < grid_.height; ++gy) {
      const double* grow = &g[static_cast<std::size_t>(gy) * grid_.width];
      double* r = &rows_[static_cast<std::size_t>(gy) * w];
      for (int x = 0; x < w; ++x) r[x] = (1.0 - ax_.a[x]) * grow[ax_.i0[x]] + ax_.a[x] * grow[ax_.i1[x]];
    }
    for (int y = 0; y < image_.height; ++y) {
      const double* r0 = &rows_[static_cast<std::size_t>(ay_.i0[y]) * w];
      const double* r1 = &rows_[static_cast<std::size_t>(ay_.i1[y]) * w];
      const double a = ay_.a[y];
      double* o = &out[static_cast<std::size_t>(y) * w];
      for (int x = 0; x < w; ++x) o[x] = (1.0 - a) * r0[x] + a * r1[x];
    }
  }

  // out += U^T field
  void adjoint_add(std::span<const double> field, std::span<double> out) {
    const int w = image_.width;
    std::fill(rows_.begin(), rows_.end(), 0.0);
    for (int y = 0; y < image_.height; ++y) {
      double* r0 = &rows_[static_cast<std::size_t>(ay_.i0[y]) * w];
      double* r1 = &rows_[static_cast<std::size_t>(ay_.i1[y]) * w];
      const double a = ay_.a[y];
      const double* f = &field[static_cast<std::size_t>(y) * w];
      for (int x = 0; x < w; ++x) {
        r0[x] += (1.0 - a) * f[x];
        r1[x] += a * f[x];
      }
    }
    for (int gy = 0; gy < grid_.height; ++gy) {
      double* grow = &out[static_cast<std::size_t>(gy) * grid_.width];
      const double* r = &rows_[static_cast<std::size_t>(gy) * w];
      for (int x = 0; x < w; ++x) {
        grow[ax_.i0[x]] += (1.0 - ax_.a[x]) * r[x];
        grow[ax_.i1[x]] += ax_.a[x] * r[x];
      }
    }
  }

 private:
  Resolution image_;
  Resolution grid_;
  AxisInterp ax_;
  AxisInterp ay_;
  std::vector<double> rows_;
};

inline double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Bilinear sample of two co-located fields (the frame gradient components) with derivatives.
struct PairSample {
  double gx, gx_dx, gx_dy;
  double gy, gy_dx, gy_dy;
};

inline PairSample sample_pair(const ScalarField& fx, const ScalarField& fy, double x, double y) {
  const int w = fx.width();
  const int h = fx.height();
  const double flx = std::floor(x);
  const double fly = std::floor(y);
  const double ax = x - flx;
  const double ay = y - fly;
  int x0 = static_cast<int>(flx), y0 = static_cast<int>(fly);
  int x1 = x0 + 1, y1 = y0 + 1;
  if (x0 < 0 || x1 >= w) x0 = reflect_index(x0, w), x1 = reflect_index(x1, w);
  if (y0 < 0 || y1 >= h) y0 = reflect_index(y0, h), y1 = reflect_index(y1, h);
  const std::size_t i00 = static_cast<std::size_t>(y0) * w + x0, i10 = static_cast<std::size_t>(y0) * w + x1;
  const std::size_t i01 = static_cast<std::size_t>(y1) * w + x0, i11 = static_cast<std::size_t>(y1) * w + x1;
  PairSample s;
  {
    const double a = fx[i00], b = fx[i10], c = fx[i01], d = fx[i11];
    s.gx = (1 - ay) * ((1 - ax) * a + ax * b) + ay * ((1 - ax) * c + ax * d);
    s.gx_dx = (1 - ay) * (b - a) + ay * (d - c);
    s.gx_dy = (1 - ax) * (c - a) + ax * (d - b);
  }
  {
    const double a = fy[i00], b = fy[i10], c = fy[i01], d = fy[i11];
    s.gy = (1 - ay) * ((1 - ax) * a + ax * b) + ay * ((1 - ax) * c + ax * d);
    s.gy_dx = (1 - ay) * (b - a) + ay * (d - c);
    s.gy_dy = (1 - ax) * (c - a) + ax * (d - b);
  }
  return s;
}

constexpr double kZeroNorm = 1e-12;

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

// Weighted anisotropic TV with forward differences, optionally accumulating its subgradient.
double weighted_tv(std::span<const double> f, std::span<const double> w, int width, int height, double scale,
                   std::span<double> grad) {
  double total = 0.0;
  const bool with_grad = !grad.empty();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const double wi = w[i];
      if (x + 1 < width) {
        const double d = f[i + 1] - f[i];
        total += wi * std::abs(d);
        if (with_grad) {
          const double g = scale * wi * sign(d);
          grad[i + 1] += g;
          grad[i] -= g;
        }
      }
      if (y + 1 < height) {
        const double d = f[i + width] - f[i];
        total += wi * std::abs(d);
        if (with_grad) {
          const double g = scale * wi * sign(d);
          grad[i + width] += g;
          grad[i] -= g;
        }
      }
    }
  }
  return total;
}

// Objective and gradient for one pyramid level with reusable buffers.
class LevelProblem {
 public:
  LevelProblem(const ObjectiveInputs& inputs, const EstimatorConfig& config, int patch_size)
      : in_(inputs),
        cfg_(config),
        res_(inputs.resolution()),
        grid_(grid_resolution(res_, patch_size)),
        up_(res_, grid_, patch_size),
        n_(res_.pixels()) {
    for (auto* b : {&q_, &vx_, &vy_, &px_, &py_, &pred_, &gvx_, &gvy_, &gpx_, &gpy_, &gpred_}) b->assign(n_, 0.0);
    samples_.resize(n_);
    measured_unit_.assign(n_, 0.0);
    const double nm = l2_norm(in_.measured.values());
    if (nm >= kZeroNorm)
      for (std::size_t i = 0; i < n_; ++i) measured_unit_[i] = in_.measured[i] / nm;
  }

  double evaluate(const EstimatorParams& params, EstimatorParams* grad) {
    const bool poisson = params.flow.channels == 1;
    const int w = res_.width, h = res_.height;

    // Per-pixel fields.
    if (poisson) {
      up_.apply(params.flow.channel_values(0), q_);
      sobel(q_, vx_, vy_);
    } else {
      up_.apply(params.flow.channel_values(0), vx_);
      up_.apply(params.flow.channel_values(1), vy_);
    }
    up_.apply(params.translation.channel_values(0), px_);
    up_.apply(params.translation.channel_values(1), py_);

    const ScalarField& lx = in_.frame_gradient.u();
    const ScalarField& ly = in_.frame_gradient.v();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        samples_[i] = sample_pair(lx, ly, x + px_[i], y + py_[i]);
        pred_[i] = -(samples_[i].gx * vx_[i] + samples_[i].gy * vy_[i]);
      }
    }

    // Data term.
    const double np = l2_norm(pred_);
    const bool degenerate = np < kZeroNorm;
    const double inv = degenerate ? 0.0 : 1.0 / np;
    double data = 0.0;
    double dot = 0.0;  // <unit prediction, sign(residual)>
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = pred_[i] * inv - measured_unit_[i];
      data += std::abs(r);
      gpred_[i] = sign(r);
      dot += pred_[i] * inv * gpred_[i];
    }

    // Regularizer.
    const auto wspan = in_.weight.values();
    if (grad) {
      std::fill(gvx_.begin(), gvx_.end(), 0.0);
      std::fill(gvy_.begin(), gvy_.end(), 0.0);
    }
    const std::span<double> gx_span = grad ? std::span<double>(gvx_) : std::span<double>();
    const std::span<double> gy_span = grad ? std::span<double>(gvy_) : std::span<double>();
    double tv = weighted_tv(vx_, wspan, w, h, cfg_.lambda1, gx_span);
    tv += weighted_tv(vy_, wspan, w, h, cfg_.lambda1, gy_span);
    double l1p = 0.0;
    for (std::size_t i = 0; i < n_; ++i) l1p += std::abs(px_[i]) + std::abs(py_[i]);
    const double value = data + cfg_.lambda1 * tv + cfg_.lambda2 * l1p;
    if (!grad) return value;

    // d data / d pred: (s - u <u, s>) / |pred|, or the plain L1 subgradient when pred == 0.
    for (std::size_t i = 0; i < n_; ++i) {
      const double gp = degenerate ? gpred_[i] : (gpred_[i] - pred_[i] * inv * dot) * inv;
      const PairSample& s = samples_[i];
      gvx_[i] -= gp * s.gx;
      gvy_[i] -= gp * s.gy;
      gpx_[i] = -gp * (s.gx_dx * vx_[i] + s.gy_dx * vy_[i]) + cfg_.lambda2 * sign(px_[i]);
      gpy_[i] = -gp * (s.gx_dy * vx_[i] + s.gy_dy * vy_[i]) + cfg_.lambda2 * sign(py_[i]);
    }

    grad->flow = params.flow;
    grad->translation = params.translation;
    std::fill(grad->flow.values.begin(), grad->flow.values.end(), 0.0);
    std::fill(grad->translation.values.begin(), grad->translation.values.end(), 0.0);
    if (poisson) {
      sobel_adjoint(gvx_, gvy_, q_);  // reuse q_ as dE/dQ
      up_.adjoint_add(q_, grad->flow.channel_values(0));
    } else {
      up_.adjoint_add(gvx_, grad->flow.channel_values(0));
      up_.adjoint_add(gvy_, grad->flow.channel_values(1));
    }
    up_.adjoint_add(gpx_, grad->translation.channel_values(0));
    up_.adjoint_add(gpy_, grad->translation.channel_values(1));
    return value;
  }

 private:
  void sobel(const std::vector<double>& q, std::vector<double>& gx, std::vector<double>& gy) const {
    const VectorField g = gradient_of_scalar(ScalarField(res_, q));
    std::copy(g.u().values().begin(), g.u().values().end(), gx.begin());
    std::copy(g.v().values().begin(), g.v().values().end(), gy.begin());
  }

  void sobel_adjoint(const std::vector<double>& gx, const std::vector<double>& gy, std::vector<double>& out) const {
    const ScalarField a = gradient_of_scalar_adjoint(VectorField(ScalarField(res_, gx), ScalarField(res_, gy)));
    std::copy(a.values().begin(), a.values().end(), out.begin());
  }

  const ObjectiveInputs& in_;
  const EstimatorConfig& cfg_;
  Resolution res_;
  Resolution grid_;
  Upsampler up_;
  std::size_t n_;
  std::vector<double> q_, vx_, vy_, px_, py_, pred_, gvx_, gvy_, gpx_, gpy_, gpred_, measured_unit_;
  std::vector<PairSample> samples_;
};

void check_params(const EstimatorParams& params, Resolution image) {
  const auto& f = params.flow;
  const auto& t = params.translation;
  if (f.channels != 1 && f.channels != 2) throw ValidationError("flow parameters need 1 or 2 channels");
  if (t.channels != 2) throw ValidationError("translation parameters need 2 channels");
  if (f.patch_size != t.patch_size) throw ValidationError("flow and translation grids differ in patch size");
  const Resolution expected = grid_resolution(image, f.patch_size);
  if (!(f.grid == expected) || !(t.grid == expected)) throw ValidationError("parameter grid does not cover the image");
  if (f.values.size() != expected.pixels() * f.channels || t.values.size() != expected.pixels() * 2) {
    throw ValidationError("parameter storage size mismatch");
  }
}

// Uniform double in [-1, 1] from the top 53 bits; independent of the standard library's distributions.
double uniform_pm1(std::mt19937_64& rng) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

}  // namespace

double sample_params(const ScalarField& grid, int patch_size, double x, double y) {
  const double gx = grid_coordinate(x, patch_size, grid.width());
  const double gy = grid_coordinate(y, patch_size, grid.height());
  const int x0 = std::min(static_cast<int>(std::floor(gx)), grid.width() - 1);
  const int y0 = std::min(static_cast<int>(std::floor(gy)), grid.height() - 1);
  const int x1 = std::min(x0 + 1, grid.width() - 1);
  const int y1 = std::min(y0 + 1, grid.height() - 1);
  const double ax = gx - x0, ay = gy - y0;
  return (1 - ay) * ((1 - ax) * grid(x0, y0) + ax * grid(x1, y0)) + ay * ((1 - ax) * grid(x0, y1) + ax * grid(x1, y1));
}

std::vector<ScalarField> upsample_params(const ParamGrid& grid, Resolution target) {
  if (!(grid.grid == grid_resolution(target, grid.patch_size))) {
    throw ValidationError("parameter grid " + to_string(grid.grid) + " does not match target " + to_string(target));
  }
  Upsampler up(target, grid.grid, grid.patch_size);
  std::vector<ScalarField> out;
  for (int c = 0; c < grid.channels; ++c) {
    ScalarField f(target);
    up.apply(grid.channel_values(c), f.values());
    out.push_back(std::move(f));
  }
  return out;
}

ParamGrid resample_params(const ParamGrid& grid, Resolution image, int patch_size, int level) {
  ParamGrid out = ParamGrid::zeros(image, patch_size, grid.channels, level);
  for (int c = 0; c < grid.channels; ++c) {
    const ScalarField src = grid.channel(c);
    auto dst = out.channel_values(c);
    for (int gy = 0; gy < out.grid.height; ++gy) {
      for (int gx = 0; gx < out.grid.width; ++gx) {
        const double cx = (gx + 0.5) * patch_size - 0.5;
        const double cy = (gy + 0.5) * patch_size - 0.5;
        dst[static_cast<std::size_t>(gy) * out.grid.width + gx] = sample_params(src, grid.patch_size, cx, cy);
      }
    }
  }
  return out;
}

ScalarField predict_increment(const ScalarField& frame_log, const VectorField& flow, const VectorField& translation) {
  if (!(frame_log.resolution() == flow.resolution()) || !(flow.resolution() == translation.resolution())) {
    throw ValidationError("predict_increment: resolutions differ");
  }
  const VectorField grad = gradient_of_scalar(frame_log);
  ScalarField out(frame_log.resolution());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const Vec2 p = translation(x, y);
      const PairSample s = sample_pair(grad.u(), grad.v(), x + p.x, y + p.y);
      const Vec2 v = flow(x, y);
      out(x, y) = -(s.gx * v.x + s.gy * v.y);
    }
  }
  return out;
}

double data_term(const ScalarField& predicted, const ScalarField& measured) {
  if (!(predicted.resolution() == measured.resolution())) throw ValidationError("data_term: resolutions differ");
  const double np = l2_norm(predicted.values());
  const double nm = l2_norm(measured.values());
  const double ip = np < kZeroNorm ? 0.0 : 1.0 / np;
  const double im = nm < kZeroNorm ? 0.0 : 1.0 / nm;
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] * ip - measured[i] * im);
  return total;
}

double reg_term(const VectorField& flow, const VectorField& translation, const ScalarField& weight, double lambda1,
                double lambda2) {
  if (!(flow.resolution() == translation.resolution()) || !(flow.resolution() == weight.resolution())) {
    throw ValidationError("reg_term: resolutions differ");
  }
  const int w = flow.width(), h = flow.height();
  const double tv = weighted_tv(flow.u().values(), weight.values(), w, h, 0.0, {}) +
                    weighted_tv(flow.v().values(), weight.values(), w, h, 0.0, {});
  double l1 = 0.0;
  for (std::size_t i = 0; i < translation.u().size(); ++i) {
    l1 += std::abs(translation.u()[i]) + std::abs(translation.v()[i]);
  }
  return lambda1 * tv + lambda2 * l1;
}

ObjectiveInputs prepare_inputs(const EventStream& window_events, const ScalarField& frame, const EstimatorConfig& config) {
  config.validate();
  const Resolution res = frame.resolution();
  if (!(window_events.resolution() == res)) {
    throw ValidationError("frame resolution " + to_string(res) + " does not match events " +
                          to_string(window_events.resolution()));
  }
  if (window_events.empty()) throw ValidationError("empty window: no events to estimate from");
  if (!frame.all_finite()) throw ValidationError("frame contains non-finite values");

  ObjectiveInputs in;
  ScalarField log_frame(res);
  for (std::size_t i = 0; i < log_frame.size(); ++i) {
    log_frame[i] = std::log(std::max(frame[i], 0.0) + config.log_offset);
  }
  in.frame_log = gaussian_smooth(log_frame, config.sigma_increment);
  in.frame_gradient = gradient_of_scalar(in.frame_log);
  in.measured = gaussian_smooth(accumulate_increment(window_events, config.contrast, res).field, config.sigma_increment);
  in.weight = weight_map(event_density(window_events, config.sigma_density, res), config.alpha);
  in.support = Mask(res);
  for (const Event& e : window_events) in.support.set(e.x, e.y, true);
  return in;
}

FieldsAtPixels expand_params(const EstimatorParams& params, Resolution image) {
  check_params(params, image);
  FieldsAtPixels out;
  auto flow = upsample_params(params.flow, image);
  if (params.flow.channels == 1) {
    out.flow = gradient_of_scalar(flow[0]);
    out.q = std::move(flow[0]);
  } else {
    out.flow = VectorField(std::move(flow[0]), std::move(flow[1]));
  }
  auto t = upsample_params(params.translation, image);
  out.translation = VectorField(std::move(t[0]), std::move(t[1]));
  return out;
}

double objective(const EstimatorParams& params, const ObjectiveInputs& inputs, const EstimatorConfig& config) {
  check_params(params, inputs.resolution());
  LevelProblem problem(inputs, config, params.flow.patch_size);
  return problem.evaluate(params, nullptr);
}

EstimatorParams objective_gradient(const EstimatorParams& params, const ObjectiveInputs& inputs,
                                   const EstimatorConfig& config) {
  check_params(params, inputs.resolution());
  LevelProblem problem(inputs, config, params.flow.patch_size);
  EstimatorParams grad;
  problem.evaluate(params, &grad);
  return grad;
}

double fit_flow_scale(const EstimatorParams& params, const ObjectiveInputs& inputs) {
  const FieldsAtPixels f = expand_params(params, inputs.resolution());
  const ScalarField pred = predict_increment(inputs.frame_log, f.flow, f.translation);
  double pm = 0.0, pp = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pm += pred[i] * inputs.measured[i];
    pp += pred[i] * pred[i];
  }
  if (pp < kZeroNorm * kZeroNorm) return 1.0;
  return pm / pp;
}

void scale_flow_params(EstimatorParams& params, double factor) {
  for (double& x : params.flow.values) x *= factor;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr, double beta1,
               double beta2, double eps) {
  if (state.m.size() != params.size() || grad.size() != params.size()) {
    throw ValidationError("adam_step: state, parameter and gradient sizes differ");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

EstimationResult estimate_from_inputs(const ObjectiveInputs& inputs, const EstimatorConfig& config) {
  config.validate();
  const Resolution res = inputs.resolution();
  const bool poisson = config.parameterization == Parameterization::poisson;

  EstimationResult result;
  result.parameterization = config.parameterization;
  result.mask = inputs.support;

  EstimatorParams params;
  std::mt19937_64 rng(config.seed);
  for (int level = 0; level < config.levels; ++level) {
    const int patch = config.patch_size(level);
    if (level == 0) {
      params.flow = ParamGrid::zeros(res, patch, poisson ? 1 : 2, 0);
      params.translation = ParamGrid::zeros(res, patch, 2, 0);
      if (poisson)
        for (double& q : params.flow.values) q = uniform_pm1(rng);
    } else {
      params.flow = resample_params(params.flow, res, patch, level);
      params.translation = resample_params(params.translation, res, patch, level);
    }

    LevelProblem problem(inputs, config, patch);
    AdamState flow_state(params.flow.values.size());
    AdamState trans_state(params.translation.values.size());
    EstimatorParams grad;
    EstimatorParams best = params;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    trace.reserve(config.iterations + 1);

    for (int k = 0; k <= config.iterations; ++k) {
      const bool last = k == config.iterations;
      const double value = problem.evaluate(params, last ? nullptr : &grad);
      trace.push_back(value);
      if (value < best_value) {
        best_value = value;
        best = params;
      }
      if (last) break;
      const double progress = config.iterations > 1 ? static_cast<double>(k) / (config.iterations - 1) : 0.0;
      const double lr = config.lr * std::pow(config.lr_decay, progress);
      adam_step(flow_state, params.flow.values, grad.flow.values, lr);
      adam_step(trans_state, params.translation.values, grad.translation.values, lr);
    }
    params = best;
    trace.back() = best_value;
    result.loss_trace.push_back(std::move(trace));
    result.level_objective.push_back(best_value);
  }
  result.final_params = params;
  if (config.calibrate_scale) {
    result.scale_factor = fit_flow_scale(params, inputs);
    scale_flow_params(params, result.scale_factor);
  }

  FieldsAtPixels fields = expand_params(params, res);
  result.v = std::move(fields.flow);
  result.p = std::move(fields.translation);
  result.q = fields.q ? std::move(*fields.q) : poisson_integrate(result.v);
  return result;
}

EstimationResult estimate(const EventStream& events, const ScalarField& frame, TimeUs t0, const EstimatorConfig& config) {
  config.validate();
  const EventStream window = slice_events(events, t0, t0 + config.window_us());
  if (window.empty()) {
    throw ValidationError("empty window [" + std::to_string(t0) + ", " + std::to_string(t0 + config.window_us()) +
                          ") us: no events");
  }
  return estimate_from_inputs(prepare_inputs(window, frame, config), config);
}

}  // namespace ebos
