#include "pmlwave/pml.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmlwave {

PmlConfig PmlConfig::around(const Rect& domain, double width, double d0) {
  PmlConfig cfg;
  cfg.width = width;
  cfg.inner_x0 = domain.x0 + width;
  cfg.inner_x1 = domain.x1 - width;
  cfg.inner_y0 = domain.y0 + width;
  cfg.inner_y1 = domain.y1 - width;
  cfg.d0 = {d0, d0, d0, d0};
  cfg.validate();
  return cfg;
}

PmlConfig PmlConfig::none() {
  PmlConfig cfg;
  cfg.d0 = {0.0, 0.0, 0.0, 0.0};
  cfg.enable_x = false;
  cfg.enable_y = false;
  return cfg;
}

bool PmlConfig::is_zero() const {
  const bool x_zero = !enable_x || (d0[0] == 0.0 && d0[1] == 0.0);
  const bool y_zero = !enable_y || (d0[2] == 0.0 && d0[3] == 0.0);
  return x_zero && y_zero;
}

void PmlConfig::validate() const {
  if (!(width > 0.0)) throw std::invalid_argument("PmlConfig: width must be positive");
  for (double d : d0)
    if (!(d >= 0.0)) throw std::invalid_argument("PmlConfig: d0 must be non-negative");
  if (!(inner_x0 <= inner_x1) || !(inner_y0 <= inner_y1))
    throw std::invalid_argument("PmlConfig: inner box is empty");
}

double damping(Axis axis, double coord, const PmlConfig& cfg) {
  const bool enabled = axis == Axis::x ? cfg.enable_x : cfg.enable_y;
  if (!enabled) return 0.0;
  const double lo = axis == Axis::x ? cfg.inner_x0 : cfg.inner_y0;
  const double hi = axis == Axis::x ? cfg.inner_x1 : cfg.inner_y1;
  const std::size_t base = axis == Axis::x ? 0 : 2;
  if (coord > hi) return cfg.d0[base + 1] * std::pow((coord - hi) / cfg.width, cfg.exponent);
  if (coord < lo) return cfg.d0[base] * std::pow((lo - coord) / cfg.width, cfg.exponent);
  return 0.0;
}

double tolerance(double c0, double width, double h, int p) {
  if (!(c0 > 0.0) || !(width > 0.0) || !(h > 0.0) || p < 1)
    throw std::invalid_argument("tolerance: arguments must be positive and p >= 1");
  return c0 * std::pow(h / (width * (p + 1)), p + 1);
}

double damping_strength(double c, double width, double tol) {
  if (!(c > 0.0) || !(width > 0.0))
    throw std::invalid_argument("damping_strength: c and width must be positive");
  if (!(tol > 0.0 && tol < 1.0))
    throw std::invalid_argument("damping_strength: tol must lie in the open interval (0, 1)");
  return 4.0 * c / (2.0 * width) * std::log(1.0 / tol);
}

StretchFactor stretch(Complex s, double d) {
  if (!(s.real() > 0.0)) throw std::invalid_argument("stretch: Re(s) must be positive");
  if (!(d >= 0.0)) throw std::invalid_argument("stretch: damping must be non-negative");
  return {1.0 + d / s};
}

double k_eta(Complex s, double d) {
  const Complex ss = s * stretch(s, d).value;
  return 2.0 * d * s.imag() * s.imag() / std::norm(ss);
}

double spectral_identity_residual(Complex s, double d) {
  const Complex S = stretch(s, d).value;
  const double lhs = (std::conj(s * S) / S).real();
  return std::abs(lhs - (s.real() + k_eta(s, d)));
}

std::array<double, 2> gamma_2d(double dx, double dy) { return {dy - dx, dx - dy}; }

double upsilon_2d(double dx, double dy) { return dx * dy; }

std::array<double, 2> theta_2d(double u, double dx, double dy, std::array<int, 2> normal) {
  return {dy * u * normal[0], dx * u * normal[1]};
}

std::array<double, 4> strengths_from_material(const Rect& domain, const PmlConfig& cfg,
                                              const MaterialField& material, double h, int p) {
  const double tol = tolerance(cfg.c0, cfg.width, h, p);
  constexpr int kSamples = 400;
  auto strip_max = [&](double xa, double xb, double ya, double yb) {
    double cmax = 0.0;
    for (int j = 0; j <= kSamples; ++j)
      for (int i = 0; i <= 8; ++i) {
        // Long direction gets the dense sampling.
        const bool wide = (xb - xa) >= (yb - ya);
        const double tx = wide ? static_cast<double>(j) / kSamples : static_cast<double>(i) / 8;
        const double ty = wide ? static_cast<double>(i) / 8 : static_cast<double>(j) / kSamples;
        cmax = std::max(cmax, material.wave_speed(xa + tx * (xb - xa), ya + ty * (yb - ya)));
      }
    return cmax;
  };
  const double c_xm = strip_max(domain.x0, cfg.inner_x0, domain.y0, domain.y1);
  const double c_xp = strip_max(cfg.inner_x1, domain.x1, domain.y0, domain.y1);
  const double c_ym = strip_max(domain.x0, domain.x1, domain.y0, cfg.inner_y0);
  const double c_yp = strip_max(domain.x0, domain.x1, cfg.inner_y1, domain.y1);
  return {damping_strength(c_xm, cfg.width, tol), damping_strength(c_xp, cfg.width, tol),
          damping_strength(c_ym, cfg.width, tol), damping_strength(c_yp, cfg.width, tol)};
}

}  // namespace pmlwave
