#pragma once

#include <vector>

#include "ebos/core.hpp"

namespace ebos {

/// Half-sample symmetric reflection (edge sample duplicated): -1 -> 0, n -> n-1.
/// This is the boundary rule used by every stencil and sampler in the library.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma). Throws ValidationError on sigma <= 0.
std::vector<double> gaussian_kernel(double sigma);

/// Separable convolution with a symmetric odd-length kernel and reflect padding.
ScalarField convolve_separable(const ScalarField& field, const std::vector<double>& kx, const std::vector<double>& ky);

/// Result of sampling a field at a continuous position together with the
/// partial derivatives of the bilinear interpolant.
struct BilinearSample {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// Bilinear interpolation with reflect padding. On integer coordinates the
/// derivative is the one-sided (right/down) slope.
BilinearSample sample_bilinear(const ScalarField& field, double x, double y);

}  // namespace ebos
