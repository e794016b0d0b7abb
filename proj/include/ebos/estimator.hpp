#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebos/core.hpp"

namespace ebos {

enum class Parameterization {
  poisson,  // one scalar per patch; flow is its Sobel gradient
  flow,     // two flow components per patch
};

std::string to_string(Parameterization p);
Parameterization parse_parameterization(const std::string& text);

struct EstimatorConfig {
  double lambda1 = 0.5;          // weighted TV on the flow
  double lambda2 = 0.1;          // L1 on the translation field
  double alpha = 0.95;           // weight-map coefficient
  double sigma_increment = 2.0;  // px, smoothing of increments and of the reference frame
  double sigma_density = 5.0;    // px, smoothing of the event histogram
  int iterations = 600;          // Adam steps per level
  double lr = 0.05;
  double lr_decay = 0.1;         // lr at the last step of a level = lr * lr_decay
  int levels = 4;
  int coarsest_patch = 64;
  double window = 1.0 / 120.0;   // seconds
  Parameterization parameterization = Parameterization::poisson;
  std::uint64_t seed = 0;
  double contrast = 0.05;        // only scales the measured increment; the objective is invariant to it
  double log_offset = 1e-3;      // L = log(I + offset), I in [0, 1]
  // The normalized data term fixes the flow only up to a positive factor, which the
  // TV term then shrinks. When set, the final flow is rescaled by the least-squares
  // fit of the unnormalized prediction to the measured increment (uses `contrast`).
  bool calibrate_scale = true;

  void validate() const;
  int patch_size(int level) const { return coarsest_patch >> level; }
  TimeUs window_us() const;
};

/// Per-patch parameters of one pyramid level, stored channel-major.
struct ParamGrid {
  int level = 0;
  int patch_size = 1;
  Resolution grid;
  int channels = 0;
  std::vector<double> values;

  static ParamGrid zeros(Resolution image, int patch_size, int channels, int level = 0);
  ScalarField channel(int c) const;
  std::span<double> channel_values(int c);
  std::span<const double> channel_values(int c) const;
};

/// Grid dimensions ceil(resolution / patch_size).
Resolution grid_resolution(Resolution image, int patch_size);

/// Continuous evaluation of the bilinear patch interpolant at pixel coordinates (x, y).
/// Patch centers sit at (i + 0.5) * patch - 0.5; beyond the outer centers the value is held constant.
double sample_params(const ScalarField& grid, int patch_size, double x, double y);

/// Bilinear upsampling of every channel to per-pixel density.
std::vector<ScalarField> upsample_params(const ParamGrid& grid, Resolution target);

/// Re-grids the interpolant of `grid` onto a finer patch size by sampling it at the new patch centers.
ParamGrid resample_params(const ParamGrid& grid, Resolution image, int patch_size, int level);

/// Linearized increment -grad(L)(x + p) . v with v in px per window.
/// The gradient is the normalized Sobel gradient of frame_log, sampled bilinearly at the warped position.
ScalarField predict_increment(const ScalarField& frame_log, const VectorField& flow, const VectorField& translation);

/// L1 distance between the L2-normalized prediction and measurement.
/// A field with L2 norm below 1e-12 normalizes to zero.
double data_term(const ScalarField& predicted, const ScalarField& measured);

/// lambda1 * sum w (|grad u|_1 + |grad v|_1) + lambda2 * sum (|p_x| + |p_y|), forward differences.
double reg_term(const VectorField& flow, const VectorField& translation, const ScalarField& weight, double lambda1,
                double lambda2);

/// Everything the objective needs that does not depend on the unknowns.
struct ObjectiveInputs {
  ScalarField frame_log;      // smoothed log-intensity reference
  VectorField frame_gradient; // Sobel gradient of frame_log
  ScalarField measured;       // smoothed brightness increment
  ScalarField weight;         // TV weight map
  Mask support;               // pixels with at least one event

  Resolution resolution() const { return frame_log.resolution(); }
};

/// Builds objective inputs from a window of events and a linear-intensity frame in [0, 1].
/// Throws ValidationError on an empty window or mismatched resolutions.
ObjectiveInputs prepare_inputs(const EventStream& window_events, const ScalarField& frame, const EstimatorConfig& config);

struct EstimatorParams {
  ParamGrid flow;         // 1 channel (q) or 2 channels (u, v)
  ParamGrid translation;  // 2 channels
};

struct FieldsAtPixels {
  std::optional<ScalarField> q;
  VectorField flow;
  VectorField translation;
};

/// Per-pixel fields implied by a parameter set.
FieldsAtPixels expand_params(const EstimatorParams& params, Resolution image);

double objective(const EstimatorParams& params, const ObjectiveInputs& inputs, const EstimatorConfig& config);

/// Gradient with respect to every patch parameter, same shapes as params.
/// L1 terms use sign(0) = 0. When the prediction is identically zero, the data
/// term's normalization has no derivative; the L1 subgradient sign(-measured)
/// is returned for the prediction instead so that optimization can leave zero.
EstimatorParams objective_gradient(const EstimatorParams& params, const ObjectiveInputs& inputs,
                                   const EstimatorConfig& config);

/// Least-squares factor s minimizing ||s * predicted - measured||_2 for the
/// per-pixel fields implied by params (unnormalized, measured uses the configured contrast).
/// Returns 1 when the prediction vanishes.
double fit_flow_scale(const EstimatorParams& params, const ObjectiveInputs& inputs);

/// Multiplies the flow parameters (q or v) by factor; the translation is untouched.
void scale_flow_params(EstimatorParams& params, double factor);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct EstimationResult {
  Parameterization parameterization = Parameterization::poisson;
  ScalarField q;      // Poisson parameters; in flow mode the least-squares integral of v
  VectorField v;      // px per window
  VectorField p;      // px
  std::vector<std::vector<double>> loss_trace;  // per level: objective before each step, then that of the kept parameters
  std::vector<double> level_objective;          // objective of the kept (best) parameters per level
  double scale_factor = 1.0;                    // calibration factor applied to the flow parameters
  Mask mask;
  EstimatorParams final_params;  // optimizer output before calibration
};

/// Coarse-to-fine estimation over one window of events with a reference frame.
/// Events outside [t0, t0 + window) are ignored.
EstimationResult estimate(const EventStream& events, const ScalarField& frame, TimeUs t0,
                          const EstimatorConfig& config);

/// Runs the optimizer on precomputed inputs.
EstimationResult estimate_from_inputs(const ObjectiveInputs& inputs, const EstimatorConfig& config);

}  // namespace ebos
