#include "ebos/image_ops.hpp"

#include <cmath>

#include "ebos/error.hpp"

namespace ebos {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("gaussian sigma must be positive, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    taps[i + radius] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

ScalarField convolve_separable(const ScalarField& field, const std::vector<double>& kx,
                               const std::vector<double>& ky) {
  const int w = field.width();
  const int h = field.height();
  const int rx = static_cast<int>(kx.size() / 2);
  const int ry = static_cast<int>(ky.size() / 2);

  ScalarField tmp(field.resolution());
  std::vector<double> row(static_cast<std::size_t>(w + 2 * rx));
  for (int y = 0; y < h; ++y) {
    for (int i = -rx; i < w + rx; ++i) row[i + rx] = field(reflect_index(i, w), y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kx.size(); ++k) acc += kx[k] * row[x + k];
      tmp(x, y) = acc;
    }
  }

  ScalarField out(field.resolution());
  std::vector<double> col(static_cast<std::size_t>(h + 2 * ry));
  for (int x = 0; x < w; ++x) {
    for (int i = -ry; i < h + ry; ++i) col[i + ry] = tmp(x, reflect_index(i, h));
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ky.size(); ++k) acc += ky[k] * col[y + k];
      out(x, y) = acc;
    }
  }
  return out;
}

BilinearSample sample_bilinear(const ScalarField& field, double x, double y) {
  const int w = field.width();
  const int h = field.height();
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const int ix = static_cast<int>(fx0);
  const int iy = static_cast<int>(fy0);
  const int x0 = reflect_index(ix, w);
  const int x1 = reflect_index(ix + 1, w);
  const int y0 = reflect_index(iy, h);
  const int y1 = reflect_index(iy + 1, h);
  const double v00 = field(x0, y0);
  const double v10 = field(x1, y0);
  const double v01 = field(x0, y1);
  const double v11 = field(x1, y1);
  BilinearSample s;
  s.value = (1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 + (1 - ax) * ay * v01 + ax * ay * v11;
  s.dx = (1 - ay) * (v10 - v00) + ay * (v11 - v01);
  s.dy = (1 - ax) * (v01 - v00) + ax * (v11 - v10);
  return s;
}

}  // namespace ebos
