#include "ebos/bos_physics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ebos/error.hpp"
#include "ebos/image_ops.hpp"

namespace ebos {

void BosGeometry::validate() const {
  if (!(focal_length > 0)) throw ValidationError("focal length must be positive");
  if (!(lens_to_object > focal_length)) throw ValidationError("lens-to-object distance must exceed focal length");
  if (!(object_to_background > 0)) throw ValidationError("object-to-background distance must be positive");
  if (!(pixel_pitch > 0)) throw ValidationError("pixel pitch must be positive");
  if (!(gladstone_dale > 0)) throw ValidationError("Gladstone-Dale constant must be positive");
  if (!(n_ambient >= 1)) throw ValidationError("ambient refractive index must be >= 1");
  if (!(object_depth > 0)) throw ValidationError("schlieren depth must be positive");
}

double refractive_index(double density, const BosGeometry& geometry) {
  if (density < 0) throw ValidationError("density must be non-negative");
  return geometry.gladstone_dale * density + 1.0;
}

Vec2 deflection_from_density_gradient(Vec2 grad, const BosGeometry& g) {
  const double k = g.object_depth / g.n_ambient * g.gladstone_dale;
  return {k * grad.x, k * grad.y};
}

Vec2 displacement_from_deflection(Vec2 eps, const BosGeometry& g) {
  const double denom = g.object_to_background + g.lens_to_object - g.focal_length;
  if (!(denom > 0)) throw ValidationError("Z_D + Z_A - f must be positive");
  const double k = g.focal_length * (g.object_to_background / denom) / g.pixel_pitch;
  return {k * eps.x, k * eps.y};
}

double displacement_per_density_gradient(const BosGeometry& g) {
  return displacement_from_deflection(deflection_from_density_gradient({1.0, 0.0}, g), g).x;
}

VectorField flow_from_displacement_pair(const VectorField& dx1, const VectorField& dx2, double dt) {
  if (!(dt > 0)) throw ValidationError("time step must be positive");
  if (!(dx1.resolution() == dx2.resolution())) throw ValidationError("displacement fields differ in resolution");
  VectorField out(dx1.resolution());
  for (std::size_t i = 0; i < out.u().size(); ++i) {
    out.u()[i] = (dx2.u()[i] - dx1.u()[i]) / dt;
    out.v()[i] = (dx2.v()[i] - dx1.v()[i]) / dt;
  }
  return out;
}

// Sobel/8: x component = [1 2 1]^T/4 (rows) * [-1 0 1]/2 (columns).
VectorField gradient_of_scalar(const ScalarField& q) {
  const int w = q.width();
  const int h = q.height();
  VectorField out(q.resolution());
  for (int y = 0; y < h; ++y) {
    const int ym = reflect_index(y - 1, h);
    const int yp = reflect_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = reflect_index(x - 1, w);
      const int xp = reflect_index(x + 1, w);
      const double a = q(xm, ym), b = q(x, ym), c = q(xp, ym);
      const double d = q(xm, y), f = q(xp, y);
      const double g = q(xm, yp), k = q(x, yp), l = q(xp, yp);
      out.u()(x, y) = ((c - a) + 2.0 * (f - d) + (l - g)) / 8.0;
      out.v()(x, y) = ((g - a) + 2.0 * (k - b) + (l - c)) / 8.0;
    }
  }
  return out;
}

ScalarField gradient_of_scalar_adjoint(const VectorField& grad) {
  const int w = grad.width();
  const int h = grad.height();
  ScalarField out(grad.resolution());
  for (int y = 0; y < h; ++y) {
    const int ym = reflect_index(y - 1, h);
    const int yp = reflect_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = reflect_index(x - 1, w);
      const int xp = reflect_index(x + 1, w);
      const double gu = grad.u()(x, y) / 8.0;
      const double gv = grad.v()(x, y) / 8.0;
      out(xm, ym) += -gu - gv;
      out(x, ym) += -2.0 * gv;
      out(xp, ym) += gu - gv;
      out(xm, y) += -2.0 * gu;
      out(xp, y) += 2.0 * gu;
      out(xm, yp) += -gu + gv;
      out(x, yp) += 2.0 * gv;
      out(xp, yp) += gu + gv;
    }
  }
  return out;
}

namespace {

// Orthonormal bases on n samples, stored basis-major: cosine[k * n + i], sine[k * n + i].
// Cosine (DCT-II): k = 0..n-1. Sine (DST-II): k = 1..n-1 stored at index k; index 0 unused.
struct Basis {
  int n = 0;
  std::vector<double> cosine;
  std::vector<double> sine;
  std::vector<double> omega;
};

Basis make_basis(int n) {
  Basis b;
  b.n = n;
  b.cosine.assign(static_cast<std::size_t>(n) * n, 0.0);
  b.sine.assign(static_cast<std::size_t>(n) * n, 0.0);
  b.omega.resize(n);
  const double s0 = std::sqrt(1.0 / n);
  const double s = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k) {
    b.omega[k] = std::numbers::pi * k / n;
    for (int i = 0; i < n; ++i) {
      const double phase = b.omega[k] * (i + 0.5);
      b.cosine[static_cast<std::size_t>(k) * n + i] = k == 0 ? s0 : s * std::cos(phase);
      b.sine[static_cast<std::size_t>(k) * n + i] = k == 0 ? 0.0 : s * std::sin(phase);
    }
  }
  return b;
}

// out(kx, ky) = sum_{x,y} in(x, y) bx[kx](x) by[ky](y)
std::vector<double> analyze(const std::vector<double>& in, int w, int h, const std::vector<double>& bx,
                            const std::vector<double>& by) {
  std::vector<double> tmp(static_cast<std::size_t>(w) * h, 0.0);  // tmp(kx, y)
  for (int y = 0; y < h; ++y) {
    const double* row = &in[static_cast<std::size_t>(y) * w];
    for (int k = 0; k < w; ++k) {
      const double* basis = &bx[static_cast<std::size_t>(k) * w];
      double acc = 0.0;
      for (int x = 0; x < w; ++x) acc += row[x] * basis[x];
      tmp[static_cast<std::size_t>(y) * w + k] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  for (int ky = 0; ky < h; ++ky) {
    const double* basis = &by[static_cast<std::size_t>(ky) * h];
    double* orow = &out[static_cast<std::size_t>(ky) * w];
    for (int y = 0; y < h; ++y) {
      const double* trow = &tmp[static_cast<std::size_t>(y) * w];
      const double b = basis[y];
      for (int k = 0; k < w; ++k) orow[k] += trow[k] * b;
    }
  }
  return out;
}

// Inverse of analyze for orthonormal bases: out(x, y) = sum coeff(kx, ky) bx[kx](x) by[ky](y).
std::vector<double> synthesize(const std::vector<double>& coeff, int w, int h, const std::vector<double>& bx,
                               const std::vector<double>& by) {
  std::vector<double> tmp(static_cast<std::size_t>(w) * h, 0.0);  // tmp(kx, y)
  for (int ky = 0; ky < h; ++ky) {
    const double* basis = &by[static_cast<std::size_t>(ky) * h];
    const double* crow = &coeff[static_cast<std::size_t>(ky) * w];
    for (int y = 0; y < h; ++y) {
      double* trow = &tmp[static_cast<std::size_t>(y) * w];
      const double b = basis[y];
      for (int k = 0; k < w; ++k) trow[k] += crow[k] * b;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    const double* trow = &tmp[static_cast<std::size_t>(y) * w];
    double* orow = &out[static_cast<std::size_t>(y) * w];
    for (int k = 0; k < w; ++k) {
      const double c = trow[k];
      if (c == 0.0) continue;
      const double* basis = &bx[static_cast<std::size_t>(k) * w];
      for (int x = 0; x < w; ++x) orow[x] += c * basis[x];
    }
  }
  return out;
}

}  // namespace

ScalarField poisson_integrate(const VectorField& v) {
  const int w = v.width();
  const int h = v.height();
  if (w == 0 || h == 0) return ScalarField(v.resolution());
  const Basis bx = make_basis(w);
  const Basis by = make_basis(h);

  const std::vector<double> vx(v.u().values().begin(), v.u().values().end());
  const std::vector<double> vy(v.v().values().begin(), v.v().values().end());
  const auto a = analyze(vx, w, h, bx.sine, by.cosine);
  const auto b = analyze(vy, w, h, bx.cosine, by.sine);

  std::vector<double> coeff(static_cast<std::size_t>(w) * h, 0.0);
  for (int ky = 0; ky < h; ++ky) {
    for (int kx = 0; kx < w; ++kx) {
      if (kx == 0 && ky == 0) continue;
      const double lx = -std::sin(bx.omega[kx]) * 0.5 * (1.0 + std::cos(by.omega[ky]));
      const double ly = -std::sin(by.omega[ky]) * 0.5 * (1.0 + std::cos(bx.omega[kx]));
      const std::size_t i = static_cast<std::size_t>(ky) * w + kx;
      coeff[i] = (lx * a[i] + ly * b[i]) / (lx * lx + ly * ly);
    }
  }
  return ScalarField(v.resolution(), synthesize(coeff, w, h, bx.cosine, by.cosine));
}

}  // namespace ebos
