#pragma once

#include <array>
#include <complex>

#include "pmlwave/mesh.hpp"

namespace pmlwave {

using Complex = std::complex<double>;

enum class Axis { x = 0, y = 1 };

/// Cubic damping profiles in a layer of width `width` outside the inner box
/// [inner_x0, inner_x1] x [inner_y0, inner_y1].
///
/// The strength may differ per side (index order: x-, x+, y-, y+) so that
/// heterogeneous media can use the local wave speed in each strip.
struct PmlConfig {
  double width = 0.6;
  double inner_x0 = -5.4;
  double inner_x1 = 5.4;
  double inner_y0 = -5.4;
  double inner_y1 = 5.4;
  std::array<double, 4> d0 = {0.0, 0.0, 0.0, 0.0};
  double exponent = 3.0;
  double c0 = 2.0;
  bool enable_x = true;
  bool enable_y = true;

  /// Layer of width `width` on every side of `domain` with uniform strength.
  static PmlConfig around(const Rect& domain, double width, double d0);
  /// No damping anywhere.
  static PmlConfig none();

  Rect inner() const { return {inner_x0, inner_x1, inner_y0, inner_y1}; }
  bool is_zero() const;
  void validate() const;
};

/// d_x(x) or d_y(y): zero inside the inner box, d0 * (dist / width)^3 in the layer.
double damping(Axis axis, double coord, const PmlConfig& cfg);

/// C0 * [(1/width) * h/(p+1)]^(p+1).
double tolerance(double c0, double width, double h, int p);

/// (4c / (2 width)) * ln(1/tol); tol must lie in (0, 1).
double damping_strength(double c, double width, double tol);

/// Complex stretch factor S = 1 + d/s.
struct StretchFactor {
  Complex value;
};

StretchFactor stretch(Complex s, double d);

/// k = 2 d b^2 / |s S|^2, the excess of Re((sS)^* / S) over a = Re(s).
double k_eta(Complex s, double d);
/// |Re((sS)^* / S) - (a + k_eta)|.
double spectral_identity_residual(Complex s, double d);

// 2D reductions of the coefficient matrices (d_z = 0). With d_z = 0 the 3D
// Upsilon has only the (z,z) entry d_x d_y left, which multiplies u in the
// main equation; every coupling to psi carries a d_z factor and drops out, as
// does the z component of phi.

/// Diagonal of Gamma: (d_y - d_x, d_x - d_y).
std::array<double, 2> gamma_2d(double dx, double dy);
/// Zeroth-order coefficient d_x d_y.
double upsilon_2d(double dx, double dy);
/// Boundary vector theta = (d_y u n_x, d_x u n_y).
std::array<double, 2> theta_2d(double u, double dx, double dy, std::array<int, 2> normal);

/// Per-side strengths from the maximum wave speed in each PML strip of
/// `domain`, using tol from (c0, width, h, p). Strips are sampled on a grid
/// fine enough to see every layer of a horizontally layered medium.
std::array<double, 4> strengths_from_material(const Rect& domain, const PmlConfig& cfg,
                                              const MaterialField& material, double h, int p);

}  // namespace pmlwave
