// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../oracle/dense_oracle.hpp"
#include "pmlwave/harness.hpp"
#include "pmlwave/laplace_lab.hpp"

using namespace pmlwave;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome quadrature_exactness() {
  double worst = 0.0;
  for (int p = 1; p <= 4; ++p) {
    const QuadRule1D r = gauss_legendre_rule(p + 1);
    for (int k = 0; k <= 2 * p + 1; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes[q], k);
      const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
      worst = std::max(worst, std::abs(s - exact) / std::max(exact, 1.0));
    }
  }
  return {worst <= 1e-13, fmt("max relative error %.3e (tol 1e-13)", worst)};
}

Outcome spectral_identity() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> A(0.01, 5.0), B(-10.0, 10.0), D(0.0, 50.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) worst = std::max(worst, spectral_identity_residual({A(rng), B(rng)}, D(rng)));
  return {worst <= 1e-12, fmt("max residual %.3e over 1000 samples (tol 1e-12)", worst)};
}

Outcome energy_inequality() {
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> A(0.5, 2.0), B(-5.0, 5.0);
  std::uniform_int_distribution<int> Dpick(0, 2);
  std::normal_distribution<double> N;
  const double dvals[3] = {0.0, 1.0, 5.0};
  const MeshQ mesh = build_cartesian_mesh({0, 1, 0, 1}, 1.0 / 6.0);
  const MaterialField mat = MaterialField::homogeneous();
  double worst = 1e300;
  bool ok = true;
  for (int i = 0; i < 20; ++i) {
    const int p = 1 + (i % 2);
    const BasisQp basis(p);
    const DofMap cont = dof_map(mesh, p, SpaceKind::continuous);
    const double d = dvals[Dpick(rng)];
    const Complex s{A(rng), B(rng)};
    const ComplexSystem sys = assemble_reduced(mesh, basis, cont, mat, s, d, d);
    CVec F(sys.size());
    for (auto& v : F) v = {N(rng), N(rng)};
    const EnergyCheck c = energy_inequality_check(sys, F);
    ok = ok && c.lhs <= c.rhs + 1e-10 * c.rhs;
    worst = std::min(worst, c.margin / c.rhs);
  }
  return {ok, fmt("min relative margin %.3e over 20 cases (must be >= -1e-10)", worst)};
}

Outcome apriori_convergence() {
  const std::vector<double> hs{0.25, 0.125, 0.0625};
  bool ok = true;
  std::string detail;
  for (int p : {1, 2})
    for (double d : {0.0, 3.0}) {
      const ConvergenceReport rep = manufactured_convergence(p, hs, {1.0, 1.0}, d);
      for (double o : rep.orders) {
        ok = ok && std::abs(o - (p + 1)) <= 0.25;
        detail += fmt("p=%g d=%g order %.3f; ", p, d, o);
      }
    }
  return {ok, detail + "(want p+1 +- 0.25)"};
}

struct UndampedRun {
  Outcome decay;
  Outcome phi;
};

UndampedRun undamped_run() {
  const Rect dom{-6, 6, -6, 6};
  const MeshQ mesh = build_cartesian_mesh(dom, 0.6);
  const BasisQp basis(2);
  const DofMap cont = dof_map(mesh, 2, SpaceKind::continuous);
  const DofMap disc = dof_map(mesh, 2, SpaceKind::discontinuous);
  const MaterialField mat = MaterialField::homogeneous();
  GaussianPulse pulse;
  pulse.cutoff = 2.0;
  Vec profile = assemble_forcing(mesh, basis, cont, mat,
                                 {[&](double x, double y) { return pulse.spatial(x, y); }, {}}, 0.0);
  WaveSystem sys(assemble_all(mesh, basis, cont, disc, mat, PmlConfig::none(), -1.0), profile,
                 [&](double t) { return pulse.envelope(t); });
  const EnergyForm form = energy_form(mesh, basis, cont, mat);
  State st = sys.zero_state();
  double prev = 0.0, worst_growth = -1e300, max_u = 0.0, max_phi = 0.0;
  Recorders rec;
  rec.on_step = [&](const State& s, std::size_t) {
    const double e = energy(s, form);
    if (s.t > 2.0 + 1e-9 && prev > 0.0) worst_growth = std::max(worst_growth, (e - prev) / prev);
    prev = e;
    for (double x : s.u) max_u = std::max(max_u, std::abs(x));
    for (double x : s.phi_x) max_phi = std::max(max_phi, std::abs(x));
    for (double x : s.phi_y) max_phi = std::max(max_phi, std::abs(x));
  };
  run(sys, st, {0.01, 10.0, 1000, {}}, rec);
  UndampedRun r;
  r.decay = {worst_growth <= 1e-8, fmt("max relative energy growth per step after t=2: %.3e (tol 1e-8)", worst_growth)};
  r.phi = {max_phi <= 1e-12 * max_u, fmt("max|phi| = %.3e, max|u| = %.3e", max_phi, max_u)};
  return r;
}

Outcome pml_convergence() {
  SimulationConfig cfg = preset("small");
  cfg.experiment = Experiment::convergence;
  cfg.h_list = {0.6, 0.3};
  cfg.p_list = {1, 2};
  cfg.t_end = 10.0;
  const auto rows = run_convergence_study(cfg);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    const auto& c = rows[i - 1];
    const auto& f = rows[i];
    const double order = f.order.value_or(0.0);
    ok = ok && f.final_error < c.final_error && order >= f.p - 0.3;
    detail += fmt("p=%g errors %.3e -> %.3e order %.3f; ", f.p, c.final_error, f.final_error, order);
  }
  return {ok, detail + "(want order >= p - 0.3)"};
}

Outcome longtime(const std::string& material) {
  SimulationConfig cfg;
  cfg.experiment = Experiment::longtime;
  cfg.material = material;
  cfg.h = 0.6;
  cfg.p = 2;
  cfg.t_end = 150.0;
  const AmplitudeSeries s = run_longtime_experiment(cfg);
  double early = 0.0, late = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double t = s.times[i], a = s.max_amp[i];
    peak = std::max(peak, a);
    if (t >= 50.0 - 1e-9 && t <= 100.0 + 1e-9) early = std::max(early, a);
    if (t >= 100.0 - 1e-9) late = std::max(late, a);
  }
  const bool ok = late <= early && late <= 0.05 * peak;
  return {ok, material + fmt(": max[100,150] %.3e, max[50,100] %.3e, peak %.3e", late, early, peak)};
}

Outcome assembly_oracle() {
  const Coefficient one = [](double, double) { return 1.0; };
  const MeshQ unit = build_cartesian_mesh({0, 1, 0, 1}, 1.0);
  const BasisQp b1(1);
  const auto K = assemble_stiffness(unit, b1, dof_map(unit, 1, SpaceKind::continuous), one).to_dense();
  double local = 0.0;
  for (std::size_t i = 0; i < 4; ++i) local = std::max(local, std::abs(K[i * 4 + i] - 2.0 / 3.0));
  local = std::max(local, std::abs(K[0 * 4 + 3] + 1.0 / 3.0));
  local = std::max(local, std::abs(K[1 * 4 + 2] + 1.0 / 3.0));
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}})
    local = std::max(local, std::abs(K[i * 4 + j] + 1.0 / 6.0));

  double rel = 0.0;
  for (int p = 1; p <= 2; ++p) {
    const MeshQ mesh = build_cartesian_mesh({0, 1, 0, 1}, 0.5);
    const BasisQp basis(p);
    const DofMap cont = dof_map(mesh, p, SpaceKind::continuous);
    const DofMap disc = dof_map(mesh, p, SpaceKind::discontinuous);
    const Operators ops = assemble_all(mesh, basis, cont, disc, MaterialField::homogeneous(), PmlConfig::none(), 1.0);
    const oracle::Assembler o(p, 2, 2, 0.5, 0.5);
    rel = std::max(rel, oracle::relative_difference(ops.M_u.to_dense(), o.mass(1.0)));
    rel = std::max(rel, oracle::relative_difference(ops.K.to_dense(), o.stiffness(1.0)));
    rel = std::max(rel, oracle::relative_difference(ops.B_x.to_dense(), o.coupling_x(1.0)));
    rel = std::max(rel, oracle::relative_difference(ops.B_y.to_dense(), o.coupling_y(1.0)));
    rel = std::max(rel, oracle::relative_difference(
                            assemble_gradient_source(mesh, basis, disc, cont, Axis::x, one).to_dense(),
                            oracle::transpose(o.coupling_x(1.0))));
    rel = std::max(rel, oracle::relative_difference(
                            assemble_gradient_source(mesh, basis, disc, cont, Axis::y, one).to_dense(),
                            oracle::transpose(o.coupling_y(1.0))));
  }
  return {local <= 1e-12 && rel <= 1e-11,
          fmt("Q1 unit stiffness error %.3e (tol 1e-12), oracle relative error %.3e (tol 1e-11)", local, rel)};
}

Outcome interpolation_condition() {
  std::mt19937_64 rng(3003);
  std::normal_distribution<double> N;
  double interp = 0.0;
  for (int p = 1; p <= 4; ++p) {
    const BasisQp basis(p);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> c(basis.num_basis()), samples(basis.num_qp(), 0.0);
      for (double& v : c) v = N(rng);
      for (std::size_t q = 0; q < basis.num_qp(); ++q)
        for (std::size_t b = 0; b < c.size(); ++b) samples[q] += c[b] * basis.value(b, q);
      const auto back = quadrature_point_interpolant(samples, basis);
      for (std::size_t b = 0; b < c.size(); ++b) interp = std::max(interp, std::abs(back[b] - c[b]));
    }
  }
  double resid = 0.0;
  const Coefficient d = [](double x, double y) { return 2.0 + 5.0 * x * x * x + y * y; };
  std::uniform_real_distribution<double> A(0.5, 2.0), B(-5.0, 5.0);
  for (int p = 1; p <= 3; ++p) {
    const MeshQ mesh = build_cartesian_mesh({0, 1, 0, 1}, 0.5);
    const BasisQp basis(p);
    const DofMap disc = dof_map(mesh, p, SpaceKind::discontinuous);
    for (int trial = 0; trial < 10; ++trial) {
      CVec g(disc.total_dofs);
      for (auto& v : g) v = {N(rng), N(rng)};
      const Complex s{A(rng), B(rng)};
      const CVec gp = projection_pi_p(mesh, basis, disc, g, s, d);
      resid = std::max(resid, projection_residual(mesh, basis, disc, g, gp, s, d));
    }
  }
  return {interp <= 1e-10 && resid <= 1e-11,
          fmt("interpolant error %.3e (tol 1e-10), projection residual %.3e (tol 1e-11)", interp, resid)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "quadrature exactness", quadrature_exactness);
  report(2, "spectral identity", spectral_identity);
  report(3, "discrete energy inequality", energy_inequality);
  report(4, "a-priori convergence", apriori_convergence);
  UndampedRun undamped;
  report(5, "undamped energy decay", [&] {
    undamped = undamped_run();
    return undamped.decay;
  });
  report(6, "zero-damping reduction", [&] { return undamped.phi; });
  report(7, "PML-error convergence", pml_convergence);
  report(8, "long-time stability", [] {
    const Outcome h = longtime("homogeneous");
    const Outcome l = longtime("layered");
    return Outcome{h.pass && l.pass, h.detail + "; " + l.detail};
  });
  report(9, "assembly oracle", assembly_oracle);
  report(10, "interpolation condition", interpolation_condition);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
