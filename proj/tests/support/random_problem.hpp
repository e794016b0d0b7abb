#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "ebos/bos_physics.hpp"
#include "ebos/estimator.hpp"
#include "ebos/event_ops.hpp"

namespace ebos::testing {

inline ScalarField random_field(Resolution res, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(res);
  for (double& x : f.values()) x = d(rng);
  return f;
}

// Smooth textured frame, smooth measured increment and a random weight map; all pixels supported.
inline ObjectiveInputs random_inputs(Resolution res, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ObjectiveInputs in;
  in.frame_log = gaussian_smooth(random_field(res, rng, -3.0, 0.0), 1.5);
  in.frame_gradient = gradient_of_scalar(in.frame_log);
  in.measured = gaussian_smooth(random_field(res, rng, -1.0, 1.0), 2.0);
  in.weight = random_field(res, rng, 0.05, 1.0);
  in.support = Mask(res, true);
  return in;
}

inline EstimatorParams random_params(Resolution res, int patch, bool poisson, std::mt19937_64& rng) {
  EstimatorParams p;
  p.flow = ParamGrid::zeros(res, patch, poisson ? 1 : 2);
  p.translation = ParamGrid::zeros(res, patch, 2);
  std::uniform_real_distribution<double> flow(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(-0.7, 0.7);
  for (double& x : p.flow.values) x = flow(rng);
  for (double& x : p.translation.values) x = shift(rng);
  return p;
}

struct GradientCheck {
  double relative_error = 0.0;  // ||analytic - fd||_2 / ||fd||_2
  double fd_norm = 0.0;
};

// Central differences over every parameter.
inline GradientCheck check_gradient(const EstimatorParams& at, const ObjectiveInputs& in, const EstimatorConfig& cfg,
                                    double step = 1e-5) {
  const EstimatorParams g = objective_gradient(at, in, cfg);
  double diff = 0.0, ref = 0.0;
  auto sweep = [&](ParamGrid EstimatorParams::*member, const std::vector<double>& analytic) {
    const std::size_t n = (at.*member).values.size();
    for (std::size_t i = 0; i < n; ++i) {
      EstimatorParams hi = at, lo = at;
      (hi.*member).values[i] += step;
      (lo.*member).values[i] -= step;
      const double fd = (objective(hi, in, cfg) - objective(lo, in, cfg)) / (2.0 * step);
      diff += (analytic[i] - fd) * (analytic[i] - fd);
      ref += fd * fd;
    }
  };
  sweep(&EstimatorParams::flow, g.flow.values);
  sweep(&EstimatorParams::translation, g.translation.values);
  return {std::sqrt(diff) / std::max(std::sqrt(ref), 1e-300), std::sqrt(ref)};
}

}  // namespace ebos::testing
