#pragma once

#include <optional>

#include "ebos/core.hpp"
#include "ebos/io.hpp"

namespace ebos {

/// Optical-flow color wheel: hue = atan2(v, u) (0 deg red, 120 deg green, 240 deg blue),
/// saturation = |v| / max_magnitude clipped to 1, full value. Zero flow is white.
/// Without max_magnitude the field's largest magnitude is used.
io::RgbImage visualize_flow(const VectorField& flow, std::optional<double> max_magnitude = std::nullopt);

/// Diverging blue-white-red map symmetric about zero, clipped at +-limit (default max |value|).
io::RgbImage visualize_signed(const ScalarField& field, std::optional<double> limit = std::nullopt);

/// Linear gray map from the field's [min, max] to [0, 255].
io::RgbImage visualize_gray(const ScalarField& field);

/// HSV (h in degrees, s and v in [0, 1]) to 8-bit RGB.
void hsv_to_rgb(double h, double s, double v, std::uint8_t* rgb);

}  // namespace ebos
