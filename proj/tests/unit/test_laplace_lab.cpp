#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "../oracle/dense_oracle.hpp"
#include "pmlwave/errors.hpp"
#include "pmlwave/laplace_lab.hpp"

using namespace pmlwave;

namespace {

struct Fixture {
  MeshQ mesh;
  BasisQp basis;
  DofMap cont, disc;
  MaterialField mat = MaterialField::homogeneous();
  Fixture(Rect r, double h, int p)
      : mesh(build_cartesian_mesh(r, h)),
        basis(p),
        cont(dof_map(mesh, p, SpaceKind::continuous)),
        disc(dof_map(mesh, p, SpaceKind::discontinuous)) {}
};

CVec random_forcing(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  CVec f(n);
  for (auto& v : f) v = {N(rng), N(rng)};
  return f;
}

Complex entry(const ComplexSparse& A, std::size_t i, std::size_t j) {
  return A.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

}  // namespace

TEST_CASE("undamped reduced operator is s^2 M + K") {
  Fixture f({0, 1, 0, 1}, 0.25, 2);
  const Complex s{0.7, 1.3};
  const ComplexSystem sys = assemble_reduced(f.mesh, f.basis, f.cont, f.mat, s, 0.0, 0.0);
  const auto K = assemble_stiffness(f.mesh, f.basis, f.cont, [](double, double) { return 1.0; });
  const auto M = assemble_mass(f.mesh, f.basis, f.cont, [](double, double) { return 1.0; });
  std::vector<char> fixed(sys.size(), 0);
  for (std::size_t d : sys.dirichlet) fixed[d] = 1;
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < sys.size(); ++i)
    for (std::size_t k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k) {
      const std::size_t j = M.col_idx[k];
      if (fixed[i] || fixed[j]) continue;
      const Complex want = s * s * M.values[k] + K.entry(i, j);
      diff = std::max(diff, std::abs(entry(sys.A, i, j) - want));
      scale = std::max(scale, std::abs(want));
    }
  CHECK(diff / scale <= 1e-13);
}

TEST_CASE("single element reduced operator matches the dense oracle") {
  // One Q1 element on the unit square: with every node on the boundary the
  // unconstrained blocks carry the information.
  Fixture f({0, 1, 0, 1}, 1.0, 1);
  const ComplexSystem sys = assemble_reduced(f.mesh, f.basis, f.cont, f.mat, {1.0, 0.0}, 0.0, 0.0);
  const oracle::Assembler o(1, 1, 1, 1.0, 1.0);
  CHECK(oracle::relative_difference(sys.M.to_dense(), o.mass(1.0)) <= 1e-12);
  const auto Kx = sys.K_x.to_dense(), Ky = sys.K_y.to_dense();
  std::vector<double> sum(Kx.size());
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = Kx[k] + Ky[k];
  CHECK(oracle::relative_difference(sum, o.stiffness(1.0)) <= 1e-12);
}

TEST_CASE("real s and damping give a real operator") {
  Fixture f({0, 1, 0, 1}, 0.25, 2);
  const ComplexSystem sys = assemble_reduced(f.mesh, f.basis, f.cont, f.mat, {1.5, 0.0}, 2.0, 5.0);
  double im = 0.0;
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(sys.A, k); it; ++it) im = std::max(im, std::abs(it.value().imag()));
  CHECK(im <= 1e-13);
}

TEST_CASE("variable damping is rejected") {
  Fixture f({-6, 6, -6, 6}, 0.6, 1);
  const PmlConfig pml = PmlConfig::around({-6, 6, -6, 6}, 0.6, 10.0);
  CHECK_THROWS_AS(assemble_reduced(f.mesh, f.basis, f.cont, f.mat, {1.0, 1.0}, pml), UnsupportedError);
  CHECK_NOTHROW(assemble_reduced(f.mesh, f.basis, f.cont, f.mat, {1.0, 1.0}, PmlConfig::none()));
}

TEST_CASE("energy inequality") {
  Fixture f({0, 1, 0, 1}, 1.0 / 6.0, 2);
  const ComplexSystem sys = assemble_reduced(f.mesh, f.basis, f.cont, f.mat, {1.0, 2.0}, 5.0, 5.0);
  const CVec zero(sys.size(), 0.0);
  const EnergyCheck z = energy_inequality_check(sys, zero);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);

  std::mt19937_64 rng(42);
  const CVec F = random_forcing(sys.size(), rng);
  const EnergyCheck c = energy_inequality_check(sys, F);
  CHECK(c.margin >= -1e-10 * c.rhs);
  CHECK(c.lhs > 0.0);

  CVec F3 = F;
  for (auto& v : F3) v *= Complex(0.0, 3.0);
  const EnergyCheck c3 = energy_inequality_check(sys, F3);
  CHECK(c3.lhs == doctest::Approx(9.0 * c.lhs).epsilon(1e-10));
  CHECK(c3.rhs == doctest::Approx(9.0 * c.rhs).epsilon(1e-10));
  CHECK((c3.margin >= 0.0) == (c.margin >= 0.0));
}

TEST_CASE("energy inequality over random undamped samples") {
  Fixture f({0, 1, 0, 1}, 1.0 / 6.0, 1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> A(0.5, 2.0), B(-5.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    const ComplexSystem sys = assemble_reduced(f.mesh, f.basis, f.cont, f.mat, {A(rng), B(rng)}, 0.0, 0.0);
    const EnergyCheck c = energy_inequality_check(sys, random_forcing(sys.size(), rng));
    CHECK(c.margin >= -1e-10 * c.rhs);
  }
}

TEST_CASE("polynomial manufactured solution is reproduced") {
  const Rect dom{0, 1, 0, 1};
  const Complex s{1.0, 1.0};
  for (double h : {0.5, 0.25}) {
    const auto sol = bubble_manufactured(dom, s, 3.0, 1.0);
    CHECK(manufactured_error(dom, 2, h, s, 3.0, 1.0, sol) <= 1e-10);
  }
}

TEST_CASE("manufactured convergence orders") {
  const std::vector<double> hs{0.25, 0.125, 0.0625};
  for (int p : {1, 2})
    for (double d : {0.0, 3.0}) {
      const ConvergenceReport rep = manufactured_convergence(p, hs, {1.0, 1.0}, d);
      REQUIRE(rep.orders.size() == 2);
      for (double o : rep.orders) {
        CAPTURE(p);
        CAPTURE(d);
        CHECK(std::abs(o - (p + 1)) <= 0.25);
      }
    }
  CHECK_THROWS_AS(manufactured_convergence(1, {0.25}, {1.0, 1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("quadrature point interpolant") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N;
  for (int p = 1; p <= 4; ++p) {
    const BasisQp basis(p);
    std::vector<double> ones(basis.num_qp(), 1.0);
    for (double c : quadrature_point_interpolant(ones, basis)) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> coeffs(basis.num_basis()), samples(basis.num_qp());
    for (double& c : coeffs) c = N(rng);
    for (std::size_t q = 0; q < basis.num_qp(); ++q) {
      samples[q] = 0.0;
      for (std::size_t b = 0; b < basis.num_basis(); ++b) samples[q] += coeffs[b] * basis.value(b, q);
    }
    const auto back = quadrature_point_interpolant(samples, basis);
    for (std::size_t b = 0; b < coeffs.size(); ++b) CHECK(std::abs(back[b] - coeffs[b]) <= 1e-11);

    // x^(p+1) is not in Q_p: the interpolant agrees only at the quadrature points.
    for (std::size_t q = 0; q < basis.num_qp(); ++q) samples[q] = std::pow(basis.qp_xi(q), p + 1);
    const auto alias = quadrature_point_interpolant(samples, basis);
    for (std::size_t q = 0; q < basis.num_qp(); ++q)
      CHECK(std::abs(basis.interpolate(alias, basis.qp_xi(q), basis.qp_eta(q)) - samples[q]) <= 1e-11);
    CHECK(std::abs(basis.interpolate(alias, 1.0, 0.0) - 1.0) > 1e-3);

    std::vector<double> wrong(basis.num_qp() + 1, 0.0);
    CHECK_THROWS_AS(quadrature_point_interpolant(wrong, basis), UnsupportedError);
    if (p > 1) {
      const QuadRule1D fewer = gauss_legendre_rule(p);
      std::vector<double> few(fewer.size() * fewer.size(), 0.0);
      CHECK_THROWS_AS(quadrature_point_interpolant(few, basis, fewer), UnsupportedError);
    }
  }
}

TEST_CASE("projection Pi_p") {
  Fixture f({0, 1, 0, 1}, 0.5, 2);
  std::mt19937_64 rng(23);
  const CVec g = random_forcing(f.disc.total_dofs, rng);
  const Complex s{1.0, 2.0};
  // Constant damping: g_p = g / (s^* + d).
  const CVec gp = projection_pi_p(f.mesh, f.basis, f.disc, g, s, [](double, double) { return 3.0; });
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(gp[i] - g[i] / (std::conj(s) + 3.0)) <= 1e-12);
  const CVec gr = projection_pi_p(f.mesh, f.basis, f.disc, g, {2.0, 0.0}, [](double, double) { return 0.0; });
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(gr[i] - g[i] / 2.0) <= 1e-12);

  const Fixture one({0, 1, 0, 1}, 1.0, 2);
  const Coefficient d = [](double x, double y) { return 4.0 * x * x * x + y; };
  for (int trial = 0; trial < 20; ++trial) {
    const CVec h = random_forcing(one.disc.total_dofs, rng);
    const CVec hp = projection_pi_p(one.mesh, one.basis, one.disc, h, s, d);
    CHECK(projection_residual(one.mesh, one.basis, one.disc, h, hp, s, d) <= 1e-11);
  }
}

TEST_CASE("verification report") {
  const auto rows = run_laplace_verification();
  CHECK(rows.size() >= 30);
  for (const auto& r : rows) {
    CAPTURE(r.check);
    CHECK(r.pass);
  }
  std::ostringstream os;
  write_verification_csv(rows, os);
  const std::string text = os.str();
  CHECK(text.rfind("check,p,h,s_re,s_im,d_x,d_y,lhs,rhs,margin_or_order,pass\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == rows.size() + 1);
}
