#pragma once

#include "ebos/core.hpp"

namespace ebos {

/// Optical constants of a background-oriented schlieren setup. Lengths in meters.
struct BosGeometry {
  double focal_length = 0.025;       // f
  double lens_to_object = 1.7;       // Z_A
  double object_to_background = 1.6; // Z_D
  double pixel_pitch = 4.86e-6;
  double n_ambient = 1.000293;       // n_inf, standard air
  double gladstone_dale = 2.23e-4;   // G, m^3/kg
  double object_depth = 0.1;         // Z, extent of the schlieren along the optical axis

  /// Throws ValidationError if any constant is out of its physical range.
  void validate() const;
};

/// Gladstone-Dale relation n = G rho + 1.
double refractive_index(double density, const BosGeometry& geometry);

/// Deflection angle (rad) from a density gradient (kg/m^4): (Z / n_inf) G grad(rho).
Vec2 deflection_from_density_gradient(Vec2 density_gradient, const BosGeometry& geometry);

/// Image-plane displacement in pixels: f Z_D / (Z_D + Z_A - f) * eps / pitch.
Vec2 displacement_from_deflection(Vec2 deflection, const BosGeometry& geometry);

/// Pixels of displacement per unit density gradient (kg/m^4) for the full chain.
double displacement_per_density_gradient(const BosGeometry& geometry);

/// Flow between two displacement fields measured against the same reference: (dx2 - dx1) / dt.
VectorField flow_from_displacement_pair(const VectorField& dx1, const VectorField& dx2, double dt_seconds);

/// Normalized Sobel gradient (kernels scaled by 1/8), reflect padding.
/// A unit-slope ramp has unit gradient at interior pixels.
VectorField gradient_of_scalar(const ScalarField& q);

/// Adjoint of gradient_of_scalar: returns G^T (gx, gy).
ScalarField gradient_of_scalar_adjoint(const VectorField& g);

/// Zero-mean least-squares integration: argmin ||G q - v||^2 for the same
/// discrete operator G as gradient_of_scalar.
///
/// With half-sample reflect padding G maps the 2-D DCT-II basis onto
/// DST-II x DCT-II (x component) and DCT-II x DST-II (y component) with
/// diagonal gains, so the normal equations are solved exactly mode by mode.
/// Only the constant mode is in the null space.
ScalarField poisson_integrate(const VectorField& v);

}  // namespace ebos
