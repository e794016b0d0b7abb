#include "ebos/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ebos/error.hpp"

namespace ebos {

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

void hsv_to_rgb(double h, double s, double v, std::uint8_t* rgb) {
  h = std::fmod(h, 360.0);
  if (h < 0) h += 360.0;
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  rgb[0] = to_byte(r + m);
  rgb[1] = to_byte(g + m);
  rgb[2] = to_byte(b + m);
}

io::RgbImage visualize_flow(const VectorField& flow, std::optional<double> max_magnitude) {
  if (!flow.u().all_finite() || !flow.v().all_finite()) throw ValidationError("cannot visualize non-finite flow");
  double limit = 0.0;
  if (max_magnitude) {
    if (!(*max_magnitude > 0)) throw ValidationError("max magnitude must be positive");
    limit = *max_magnitude;
  } else {
    for (std::size_t i = 0; i < flow.u().size(); ++i) limit = std::max(limit, std::hypot(flow.u()[i], flow.v()[i]));
    if (limit == 0.0) limit = 1.0;
  }
  io::RgbImage img(flow.resolution());
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      const Vec2 f = flow(x, y);
      const double mag = std::hypot(f.x, f.y);
      const double hue = std::atan2(f.y, f.x) * 180.0 / std::numbers::pi;
      hsv_to_rgb(hue, std::min(mag / limit, 1.0), 1.0, img.at(x, y));
    }
  }
  return img;
}

io::RgbImage visualize_signed(const ScalarField& field, std::optional<double> limit) {
  double l = limit ? *limit : field.max_abs();
  if (!(l > 0)) l = 1.0;
  io::RgbImage img(field.resolution());
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      const double t = std::clamp(field(x, y) / l, -1.0, 1.0);
      std::uint8_t* p = img.at(x, y);
      // Positive toward red, negative toward blue.
      p[0] = to_byte(t < 0 ? 1.0 + t : 1.0);
      p[1] = to_byte(1.0 - std::abs(t));
      p[2] = to_byte(t > 0 ? 1.0 - t : 1.0);
    }
  }
  return img;
}

io::RgbImage visualize_gray(const ScalarField& field) {
  double lo = 0, hi = 0;
  if (field.size() > 0) {
    const auto [mn, mx] = std::minmax_element(field.values().begin(), field.values().end());
    lo = *mn;
    hi = *mx;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  io::RgbImage img(field.resolution());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const std::uint8_t g = to_byte((field[i] - lo) / span);
    std::fill_n(&img.pixels[i * 3], 3, g);
  }
  return img;
}

}  // namespace ebos
