#include "pmlwave/laplace_lab.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pmlwave/errors.hpp"

namespace pmlwave {

namespace {

using Triplet = Eigen::Triplet<Complex>;

void require_positive_real_part(Complex s) {
  if (!(s.real() > 0.0)) throw std::invalid_argument("laplace lab: Re(s) must be positive");
}

double hermitian_form(const CsrMatrix& A, const CVec& x) {
  // Re(x^H A x) for real symmetric A.
  const std::size_t n = A.rows;
  std::vector<double> xr(n), xi(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    xr[i] = x[i].real();
    xi[i] = x[i].imag();
  }
  double acc = 0.0;
  A.multiply(xr, t);
  for (std::size_t i = 0; i < n; ++i) acc += xr[i] * t[i];
  A.multiply(xi, t);
  for (std::size_t i = 0; i < n; ++i) acc += xi[i] * t[i];
  return acc;
}

CVec complex_load(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                  const std::function<Complex(double, double)>& f) {
  const Vec re = assemble_load(mesh, basis, cont, [&](double x, double y) { return f(x, y).real(); });
  const Vec im = assemble_load(mesh, basis, cont, [&](double x, double y) { return f(x, y).imag(); });
  CVec out(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = {re[i], im[i]};
  return out;
}

CVec solve_with_load(const ComplexSystem& sys, CVec b) {
  for (std::size_t d : sys.dirichlet) b[d] = 0.0;
  Eigen::SparseMatrix<Complex> A(sys.A);
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw NumericalError("solve_reduced: sparse LU factorization failed: " + lu.lastErrorMessage());
  Eigen::Map<const Eigen::VectorXcd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("solve_reduced: sparse LU solve failed");
  return CVec(x.data(), x.data() + x.size());
}

}  // namespace

ComplexSystem assemble_reduced(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                               const MaterialField& material, Complex s, double dx, double dy) {
  require_positive_real_part(s);
  if (!(dx >= 0.0) || !(dy >= 0.0))
    throw std::invalid_argument("assemble_reduced: damping must be non-negative");
  ComplexSystem sys;
  sys.s = s;
  sys.dx = dx;
  sys.dy = dy;
  sys.M = assemble_mass(mesh, basis, cont, [&](double x, double y) { return 1.0 / material.kappa(x, y); });
  auto inv_rho = [&](double x, double y) { return 1.0 / material.rho(x, y); };
  sys.K_x = assemble_stiffness(mesh, basis, cont, inv_rho, Axis::x);
  sys.K_y = assemble_stiffness(mesh, basis, cont, inv_rho, Axis::y);
  sys.dirichlet = cont.boundary;

  const Complex Sx = stretch(s, dx).value;
  const Complex Sy = stretch(s, dy).value;
  const Complex cm = s * s * Sx * Sy;
  const Complex cx = Sy / Sx;
  const Complex cy = Sx / Sy;

  std::vector<char> fixed(cont.total_dofs, 0);
  for (std::size_t d : sys.dirichlet) fixed[d] = 1;
  std::vector<Triplet> trips;
  trips.reserve(sys.M.nnz());
  for (std::size_t i = 0; i < sys.M.rows; ++i) {
    if (fixed[i]) {
      trips.emplace_back(i, i, Complex(1.0, 0.0));
      continue;
    }
    for (std::size_t k = sys.M.row_ptr[i]; k < sys.M.row_ptr[i + 1]; ++k) {
      const std::size_t j = sys.M.col_idx[k];
      if (fixed[j]) continue;
      const Complex v = cm * sys.M.values[k] + cx * sys.K_x.values[k] + cy * sys.K_y.values[k];
      trips.emplace_back(i, j, v);
    }
  }
  const auto n = static_cast<Eigen::Index>(cont.total_dofs);
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

ComplexSystem assemble_reduced(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                               const MaterialField& material, Complex s, const PmlConfig& pml) {
  // Constant damping is representable only if the profile is zero on the mesh.
  const auto& dom = mesh.domain();
  const bool x_active = damping(Axis::x, dom.x0, pml) != 0.0 || damping(Axis::x, dom.x1, pml) != 0.0;
  const bool y_active = damping(Axis::y, dom.y0, pml) != 0.0 || damping(Axis::y, dom.y1, pml) != 0.0;
  if (x_active || y_active)
    throw UnsupportedError(
        "assemble_reduced: spatially varying damping is not supported in the reduced form");
  return assemble_reduced(mesh, basis, cont, material, s, 0.0, 0.0);
}

CVec solve_reduced(const ComplexSystem& sys, const CVec& forcing) {
  if (forcing.size() != sys.size()) throw std::invalid_argument("solve_reduced: size mismatch");
  // (F/kappa, v)_h = M F for the nodal interpolant of F.
  const std::size_t n = sys.size();
  std::vector<double> re(n), im(n), tr(n), ti(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = forcing[i].real();
    im[i] = forcing[i].imag();
  }
  sys.M.multiply(re, tr);
  sys.M.multiply(im, ti);
  CVec b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = {tr[i], ti[i]};
  return solve_with_load(sys, std::move(b));
}

LaplaceEnergies laplace_energies(const ComplexSystem& sys, const CVec& u, const CVec& forcing) {
  const Complex Sx = stretch(sys.s, sys.dx).value;
  const Complex Sy = stretch(sys.s, sys.dy).value;
  const double e2 = std::norm(sys.s) * hermitian_form(sys.M, u) +
                    hermitian_form(sys.K_x, u) / std::norm(Sx) +
                    hermitian_form(sys.K_y, u) / std::norm(Sy);
  LaplaceEnergies e;
  e.E_u = std::sqrt(std::max(e2, 0.0));
  e.E_f = std::sqrt(std::max(hermitian_form(sys.M, forcing), 0.0));
  return e;
}

EnergyCheck energy_inequality_check(const ComplexSystem& sys, const CVec& forcing) {
  const CVec u = solve_reduced(sys, forcing);
  EnergyCheck c;
  c.energies = laplace_energies(sys, u, forcing);
  c.lhs = sys.s.real() * c.energies.E_u * c.energies.E_u;
  c.rhs = 2.0 * c.energies.E_u * c.energies.E_f;
  c.margin = c.rhs - c.lhs;
  return c;
}

ManufacturedSolution sine_manufactured(const Rect& domain, Complex s, double dx, double dy,
                                       Complex alpha) {
  const double kx = std::numbers::pi / domain.width();
  const double ky = std::numbers::pi / domain.height();
  const Complex Sx = stretch(s, dx).value;
  const Complex Sy = stretch(s, dy).value;
  const Complex symbol = s * s * Sx * Sy + (Sy / Sx) * kx * kx + (Sx / Sy) * ky * ky;
  auto exact = [=](double x, double y) {
    return alpha * std::sin(kx * (x - domain.x0)) * std::sin(ky * (y - domain.y0));
  };
  return {exact, [=](double x, double y) { return symbol * exact(x, y); }};
}

ManufacturedSolution bubble_manufactured(const Rect& domain, Complex s, double dx, double dy,
                                         Complex alpha) {
  const Complex Sx = stretch(s, dx).value;
  const Complex Sy = stretch(s, dy).value;
  auto X = [=](double x) { return (x - domain.x0) * (domain.x1 - x); };
  auto Y = [=](double y) { return (y - domain.y0) * (domain.y1 - y); };
  auto exact = [=](double x, double y) { return alpha * X(x) * Y(y); };
  auto load = [=](double x, double y) {
    return s * s * Sx * Sy * exact(x, y) + 2.0 * alpha * (Sy / Sx) * Y(y) +
           2.0 * alpha * (Sx / Sy) * X(x);
  };
  return {exact, load};
}

double manufactured_error(const Rect& domain, int p, double h, Complex s, double dx, double dy,
                          const ManufacturedSolution& sol) {
  const MeshQ mesh = build_cartesian_mesh(domain, h);
  const BasisQp basis(p);
  const DofMap cont = dof_map(mesh, p, SpaceKind::continuous);
  const MaterialField unit = MaterialField::homogeneous();
  const ComplexSystem sys = assemble_reduced(mesh, basis, cont, unit, s, dx, dy);
  const CVec u = solve_with_load(sys, complex_load(mesh, basis, cont, sol.load));

  const QuadRule1D rule = gauss_legendre_rule(p + 2);
  const Tabulation1D tab = tabulate(basis.gll_nodes(), rule.nodes);
  const std::size_t n = basis.n1d();
  const double jac = 0.25 * mesh.hx() * mesh.hy();
  double err2 = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = cont.element(e);
    for (std::size_t qb = 0; qb < rule.size(); ++qb)
      for (std::size_t qa = 0; qa < rule.size(); ++qa) {
        Complex uh = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < n; ++i)
            uh += u[el[j * n + i]] * tab.value(i, qa) * tab.value(j, qb);
        const auto pt = mesh.map(e, rule.nodes[qa], rule.nodes[qb]);
        err2 += rule.weights[qa] * rule.weights[qb] * jac * std::norm(uh - sol.exact(pt[0], pt[1]));
      }
  }
  return std::sqrt(err2);
}

ConvergenceReport manufactured_convergence(int p, const std::vector<double>& hs, Complex s,
                                           double d) {
  if (hs.size() < 2)
    throw std::invalid_argument("manufactured_convergence: need at least two mesh sizes");
  const Rect unit{0.0, 1.0, 0.0, 1.0};
  const ManufacturedSolution sol = sine_manufactured(unit, s, d, d);
  ConvergenceReport rep;
  rep.h = hs;
  for (double h : hs) rep.errors.push_back(manufactured_error(unit, p, h, s, d, d, sol));
  for (std::size_t i = 1; i < hs.size(); ++i)
    rep.orders.push_back(std::log(rep.errors[i - 1] / rep.errors[i]) / std::log(hs[i - 1] / hs[i]));
  return rep;
}

std::vector<double> quadrature_point_interpolant(std::span<const double> qp_values,
                                                 const BasisQp& basis, const QuadRule1D& rule) {
  const std::size_t n = basis.n1d();
  if (rule.size() != n || qp_values.size() != n * n) {
    std::ostringstream msg;
    msg << "quadrature_point_interpolant: " << rule.size() << "-point rule with "
        << qp_values.size() << " values cannot interpolate into Q_" << basis.order()
        << " (dimension " << n * n << "); the interpolation condition needs exactly "
        << n << " points per direction";
    throw UnsupportedError(msg.str());
  }
  // values(qa, qb) = sum_ij C(i, j) L_i(x_qa) L_j(x_qb): invert the 1D
  // Vandermonde V(q, i) = L_i(x_q) along each direction.
  const Tabulation1D tab = tabulate(basis.gll_nodes(), rule.nodes);
  Eigen::MatrixXd V(n, n);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t i = 0; i < n; ++i) V(q, i) = tab.value(i, q);
  Eigen::MatrixXd vals(n, n);  // (qa, qb)
  for (std::size_t qb = 0; qb < n; ++qb)
    for (std::size_t qa = 0; qa < n; ++qa) vals(qa, qb) = qp_values[qb * n + qa];
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(V);
  const Eigen::MatrixXd tmp = lu.solve(vals);                        // (i, qb)
  const Eigen::MatrixXd C = lu.solve(tmp.transpose()).transpose();   // (i, j)
  std::vector<double> coeffs(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) coeffs[j * n + i] = C(i, j);
  return coeffs;
}

std::vector<double> quadrature_point_interpolant(std::span<const double> qp_values,
                                                 const BasisQp& basis) {
  return quadrature_point_interpolant(qp_values, basis, basis.quad());
}

namespace {

// Local matrices of (w, c g)_h for one element with complex pointwise weight.
Eigen::MatrixXcd weighted_local_mass(const MeshQ& mesh, const BasisQp& basis, std::size_t e,
                                     const std::function<Complex(double, double)>& c) {
  const std::size_t nb = basis.num_basis();
  const double jac = 0.25 * mesh.hx() * mesh.hy();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(nb, nb);
  for (std::size_t q = 0; q < basis.num_qp(); ++q) {
    const auto pt = mesh.map(e, basis.qp_xi(q), basis.qp_eta(q));
    const Complex w = basis.weight(q) * jac * c(pt[0], pt[1]);
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) M(a, b) += w * basis.value(a, q) * basis.value(b, q);
  }
  return M;
}

}  // namespace

CVec projection_pi_p(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc, const CVec& g,
                     Complex s, const Coefficient& d) {
  require_positive_real_part(s);
  if (disc.kind != SpaceKind::discontinuous || g.size() != disc.total_dofs)
    throw std::invalid_argument("projection_pi_p: expects a discontinuous-space vector");
  const std::size_t nb = basis.num_basis();
  const Complex sc = std::conj(s);
  CVec out(g.size());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto A = weighted_local_mass(mesh, basis, e, [&](double x, double y) { return sc + d(x, y); });
    const auto M = weighted_local_mass(mesh, basis, e, [](double, double) { return Complex(1.0, 0.0); });
    Eigen::VectorXcd ge(nb);
    for (std::size_t a = 0; a < nb; ++a) ge(a) = g[e * nb + a];
    const Eigen::VectorXcd x = A.partialPivLu().solve(M * ge);
    for (std::size_t a = 0; a < nb; ++a) out[e * nb + a] = x(a);
  }
  return out;
}

double projection_residual(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc,
                           const CVec& g, const CVec& g_p, Complex s, const Coefficient& d) {
  const std::size_t nb = basis.num_basis();
  const Complex sc = std::conj(s);
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto A = weighted_local_mass(mesh, basis, e, [&](double x, double y) { return sc + d(x, y); });
    const auto M = weighted_local_mass(mesh, basis, e, [](double, double) { return Complex(1.0, 0.0); });
    Eigen::VectorXcd ge(nb), gp(nb);
    for (std::size_t a = 0; a < nb; ++a) {
      ge(a) = g[e * nb + a];
      gp(a) = g_p[e * nb + a];
    }
    const Eigen::VectorXcd rhs = M * ge;
    const double scale = std::max(rhs.norm(), 1e-300);
    worst = std::max(worst, (A * gp - rhs).norm() / scale);
  }
  (void)disc;
  return worst;
}

void write_verification_csv(const std::vector<VerificationRow>& rows, std::ostream& os) {
  os << "check,p,h,s_re,s_im,d_x,d_y,lhs,rhs,margin_or_order,pass\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.check << ',' << r.p << ',' << r.h << ',' << r.s.real() << ',' << r.s.imag() << ','
       << r.dx << ',' << r.dy << ',' << r.lhs << ',' << r.rhs << ',' << r.margin_or_order << ','
       << (r.pass ? "true" : "false") << '\n';
}

std::vector<VerificationRow> run_laplace_verification(std::uint64_t seed) {
  std::vector<VerificationRow> rows;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Discrete energy inequality, constant damping.
  {
    const Rect dom{0.0, 1.0, 0.0, 1.0};
    const MeshQ mesh = build_cartesian_mesh(dom, 1.0 / 6.0);
    const MaterialField mat = MaterialField::homogeneous();
    const double dampings[] = {0.0, 1.0, 5.0};
    std::uniform_real_distribution<double> a_dist(0.5, 2.0), b_dist(-5.0, 5.0);
    std::uniform_int_distribution<int> d_pick(0, 2);
    for (int k = 0; k < 20; ++k) {
      const int p = 1 + k % 2;
      const BasisQp basis(p);
      const DofMap cont = dof_map(mesh, p, SpaceKind::continuous);
      const Complex s(a_dist(rng), b_dist(rng));
      const double dx = dampings[d_pick(rng)];
      const double dy = dampings[d_pick(rng)];
      CVec f(cont.total_dofs);
      for (auto& v : f) v = {unit(rng), unit(rng)};
      const ComplexSystem sys = assemble_reduced(mesh, basis, cont, mat, s, dx, dy);
      const EnergyCheck c = energy_inequality_check(sys, f);
      rows.push_back({"energy_inequality", p, mesh.hx(), s, dx, dy, c.lhs, c.rhs, c.margin,
                      c.margin >= -1e-10 * c.rhs});
    }
  }

  // A-priori convergence with a manufactured solution.
  for (int p : {1, 2})
    for (double d : {0.0, 3.0}) {
      const Complex s(1.0, 1.0);
      const ConvergenceReport rep = manufactured_convergence(p, {0.25, 0.125, 0.0625}, s, d);
      for (std::size_t i = 0; i < rep.orders.size(); ++i) {
        const double order = rep.orders[i];
        rows.push_back({"convergence_order", p, rep.h[i + 1], s, d, d, rep.errors[i],
                        rep.errors[i + 1], order, std::abs(order - (p + 1)) <= 0.25});
      }
    }

  // Quadrature point interpolant on random Q_p data.
  for (int p = 1; p <= 4; ++p) {
    const BasisQp basis(p);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> coeffs(basis.num_basis());
      for (auto& c : coeffs) c = unit(rng);
      std::vector<double> samples(basis.num_qp());
      for (std::size_t q = 0; q < basis.num_qp(); ++q) {
        double v = 0.0;
        for (std::size_t b = 0; b < basis.num_basis(); ++b) v += coeffs[b] * basis.value(b, q);
        samples[q] = v;
      }
      const auto rec = quadrature_point_interpolant(samples, basis);
      for (std::size_t b = 0; b < coeffs.size(); ++b) worst = std::max(worst, std::abs(rec[b] - coeffs[b]));
    }
    rows.push_back({"quadrature_interpolant", p, 0.0, {}, 0.0, 0.0, 0.0, 0.0, worst, worst <= 1e-10});
  }

  // Projection Pi_p with variable damping.
  {
    const MeshQ mesh = build_cartesian_mesh({0.0, 1.0, 0.0, 1.0}, 0.25);
    std::uniform_real_distribution<double> a_dist(0.5, 2.0), b_dist(-5.0, 5.0);
    for (int p : {1, 2, 3}) {
      const BasisQp basis(p);
      const DofMap disc = dof_map(mesh, p, SpaceKind::discontinuous);
      const Complex s(a_dist(rng), b_dist(rng));
      auto d = [](double x, double y) { return 4.0 * x * x * x + 2.0 * std::sin(3.0 * y) + 2.0; };
      CVec g(disc.total_dofs);
      for (auto& v : g) v = {unit(rng), unit(rng)};
      const CVec gp = projection_pi_p(mesh, basis, disc, g, s, d);
      const double res = projection_residual(mesh, basis, disc, g, gp, s, d);
      rows.push_back({"projection_pi_p", p, mesh.hx(), s, 0.0, 0.0, 0.0, 0.0, res, res <= 1e-11});
    }
  }
  return rows;
}

}  // namespace pmlwave
