#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pmlwave/pml.hpp"

using namespace pmlwave;

TEST_CASE("damping profile") {
  PmlConfig cfg = PmlConfig::around({-6, 6, -6, 6}, 0.6, 8.0);
  CHECK(damping(Axis::x, 5.4, cfg) == 0.0);
  CHECK(damping(Axis::x, 0.0, cfg) == 0.0);
  CHECK(damping(Axis::x, 6.0, cfg) == doctest::Approx(8.0));
  CHECK(damping(Axis::x, 5.7, cfg) == doctest::Approx(1.0));
  CHECK(damping(Axis::y, -5.7, cfg) == doctest::Approx(1.0));
  cfg.enable_y = false;
  CHECK(damping(Axis::y, -5.7, cfg) == 0.0);
  CHECK(PmlConfig::none().is_zero());
}

TEST_CASE("per-side strengths") {
  PmlConfig cfg = PmlConfig::around({-6, 6, -6, 6}, 0.6, 0.0);
  cfg.d0 = {1.0, 2.0, 3.0, 4.0};
  CHECK(damping(Axis::x, -6.0, cfg) == doctest::Approx(1.0));
  CHECK(damping(Axis::x, 6.0, cfg) == doctest::Approx(2.0));
  CHECK(damping(Axis::y, -6.0, cfg) == doctest::Approx(3.0));
  CHECK(damping(Axis::y, 6.0, cfg) == doctest::Approx(4.0));
}

TEST_CASE("tolerance and damping_strength") {
  CHECK(tolerance(2.0, 0.6, 0.3, 2) == doctest::Approx(1.0 / 108.0).epsilon(1e-14));
  CHECK(tolerance(2.0, 0.6, 0.6, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tolerance(2.0, 0.6, 0.15, 2) < tolerance(2.0, 0.6, 0.3, 2));
  const double d0 = damping_strength(1.0, 0.6, 1.0 / 108.0);
  CHECK(d0 == doctest::Approx((4.0 / 1.2) * std::log(108.0)).epsilon(1e-14));
  CHECK(d0 == doctest::Approx(15.6071).epsilon(1e-5));
  CHECK(damping_strength(2.0, 0.6, 1.0 / 108.0) == doctest::Approx(2.0 * d0));
  CHECK_THROWS_AS(damping_strength(1.0, 0.6, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(damping_strength(1.0, 0.6, 0.0), std::invalid_argument);
}

TEST_CASE("stretch factor") {
  CHECK(stretch({1.0, 2.0}, 0.0).value == Complex(1.0, 0.0));
  const Complex S = stretch({1.0, 1.0}, 1.0).value;
  CHECK(S.real() == doctest::Approx(1.5));
  CHECK(S.imag() == doctest::Approx(-0.5));
  CHECK_THROWS_AS(stretch({0.0, 1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(stretch({1.0, 1.0}, -1.0), std::invalid_argument);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> A(1e-3, 5.0), B(-20.0, 20.0), D(0.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const Complex s{A(rng), B(rng)};
    CHECK(std::abs(1.0 / stretch(s, D(rng)).value) <= 1.0 + 1e-15);
  }
}

TEST_CASE("spectral identity") {
  CHECK(k_eta({1.0, 1.0}, 0.0) == 0.0);
  CHECK(k_eta({1.0, 1.0}, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
  // (sS)^* / S with s = 1+i, S = 1.5 - 0.5i: (2 - i) / (1.5 - 0.5i) = 1.4 - 0.2i
  const Complex s{1.0, 1.0};
  const Complex S = stretch(s, 1.0).value;
  CHECK((std::conj(s * S) / S).real() == doctest::Approx(1.4).epsilon(1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> A(0.01, 5.0), B(-10.0, 10.0), D(0.0, 50.0);
  for (int i = 0; i < 1000; ++i) CHECK(spectral_identity_residual({A(rng), B(rng)}, D(rng)) <= 1e-12);
}

TEST_CASE("2D coefficient reductions") {
  const auto g = gamma_2d(2.0, 5.0);
  CHECK(g[0] == 3.0);
  CHECK(g[1] == -3.0);
  CHECK(upsilon_2d(2.0, 5.0) == 10.0);
  const auto eq = gamma_2d(4.0, 4.0);
  CHECK(eq[0] == 0.0);
  CHECK(eq[1] == 0.0);
  const auto th0 = theta_2d(3.0, 0.0, 0.0, {1, 0});
  CHECK(th0[0] == 0.0);
  CHECK(th0[1] == 0.0);
  const auto th = theta_2d(3.0, 2.0, 5.0, {1, -1});
  CHECK(th[0] == 15.0);
  CHECK(th[1] == -6.0);
}

TEST_CASE("strengths from material") {
  const Rect dom{-6, 6, -6, 6};
  const PmlConfig cfg = PmlConfig::around(dom, 0.6, 0.0);
  const double tol = tolerance(2.0, 0.6, 0.3, 2);
  const auto hom = strengths_from_material(dom, cfg, MaterialField::homogeneous(), 0.3, 2);
  for (double d : hom) CHECK(d == doctest::Approx(damping_strength(1.0, 0.6, tol)));
  const auto lay = strengths_from_material(
      dom, cfg, MaterialField::layered({1.25, 1.0, 0.75}, {-2.4, 2.4}), 0.3, 2);
  CHECK(lay[0] == doctest::Approx(damping_strength(1.25, 0.6, tol)));
  CHECK(lay[1] == doctest::Approx(damping_strength(1.25, 0.6, tol)));
  CHECK(lay[2] == doctest::Approx(damping_strength(1.25, 0.6, tol)));
  CHECK(lay[3] == doctest::Approx(damping_strength(0.75, 0.6, tol)));
}
