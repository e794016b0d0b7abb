#pragma once

#include <cmath>
#include <numbers>

#include "ebos/analysis.hpp"

namespace ebos::testing {

// Parallel Gaussian streaks tilted by angle_deg from the time axis (rows),
// so x advances tan(angle) px per row. Spacing and width are measured across the streaks.
inline Kymogram render_streaks(int width, int rows, double angle_deg, double rate, double spacing = 11.0,
                               double streak_sigma = 1.5) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  Kymogram k;
  k.rate = rate;
  k.values = ScalarField({width, rows});
  for (int t = 0; t < rows; ++t) {
    for (int x = 0; x < width; ++x) {
      const double u = x * std::cos(a) - t * std::sin(a);  // coordinate across the streaks
      double d = std::fmod(u, spacing);
      if (d < 0) d += spacing;
      d = std::min(d, spacing - d);
      k.values(x, t) = std::exp(-d * d / (2.0 * streak_sigma * streak_sigma));
    }
  }
  return k;
}

}  // namespace ebos::testing
