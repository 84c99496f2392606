#include "pmlwave/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pmlwave/errors.hpp"

namespace pmlwave {

void State::axpy(double alpha, const State& other) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += alpha * other.u[i];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += alpha * other.v[i];
  for (std::size_t i = 0; i < phi_x.size(); ++i) phi_x[i] += alpha * other.phi_x[i];
  for (std::size_t i = 0; i < phi_y.size(); ++i) phi_y[i] += alpha * other.phi_y[i];
}

bool State::all_finite() const {
  auto finite = [](const Vec& x) {
    return std::all_of(x.begin(), x.end(), [](double a) { return std::isfinite(a); });
  };
  return finite(u) && finite(v) && finite(phi_x) && finite(phi_y);
}

namespace {

BlockDiagonal block_product(const BlockDiagonal& A, const BlockDiagonal& B) {
  const std::size_t n = A.block_size;
  BlockDiagonal C{n, std::vector<double>(A.blocks.size(), 0.0)};
  for (std::size_t b = 0; b < A.num_blocks(); ++b) {
    const auto a = A.block(b);
    const auto bb = B.block(b);
    auto c = C.block(b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = a[i * n + k];
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * bb[k * n + j];
      }
  }
  return C;
}

bool all_zero(const CsrMatrix& A) {
  return std::all_of(A.values.begin(), A.values.end(), [](double v) { return v == 0.0; });
}

bool all_zero(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

}  // namespace

WaveSystem::WaveSystem(Operators ops) : WaveSystem(std::move(ops), {}, {}) {}

WaveSystem::WaveSystem(Operators ops, Vec forcing_profile, std::function<double(double)> envelope)
    : ops_(std::move(ops)), forcing_(std::move(forcing_profile)), envelope_(std::move(envelope)) {
  if (ops_.r == -1.0) apply_dirichlet(ops_);
  if (!forcing_.empty()) {
    if (forcing_.size() != ops_.num_u())
      throw std::invalid_argument("WaveSystem: forcing profile has the wrong length");
    apply_dirichlet(forcing_, ops_.dirichlet);
  }
  stiff_ = add_same_pattern(1.0, ops_.K, 1.0, ops_.M_d0);
  inv_diag_ = ops_.M_u.diagonal();
  for (double& d : inv_diag_) {
    if (!(d > 0.0)) throw NumericalError("WaveSystem: mass matrix has a non-positive diagonal");
    d = 1.0 / d;
  }
  inv_phi_ = ops_.M_phi.inverse_spd();
  decay_x_ = block_product(inv_phi_, ops_.M_phi_dx);
  decay_y_ = block_product(inv_phi_, ops_.M_phi_dy);
  damped_ = !(all_zero(ops_.G_x) && all_zero(ops_.G_y) && ops_.M_phi_dx.is_zero() &&
              ops_.M_phi_dy.is_zero());
  warm_.assign(ops_.num_u(), 0.0);
  rhs_buf_.assign(ops_.num_u(), 0.0);
  phi_buf_.assign(ops_.num_phi(), 0.0);
}

State WaveSystem::zero_state() const {
  State s;
  s.u.assign(ops_.num_u(), 0.0);
  s.v.assign(ops_.num_u(), 0.0);
  s.phi_x.assign(ops_.num_phi(), 0.0);
  s.phi_y.assign(ops_.num_phi(), 0.0);
  return s;
}

void WaveSystem::constrain(State& state) const {
  apply_dirichlet(state.u, ops_.dirichlet);
  apply_dirichlet(state.v, ops_.dirichlet);
}

State WaveSystem::rhs(const State& state, double t) {
  State out = zero_state();
  rhs(state, t, out);
  return out;
}

void WaveSystem::rhs(const State& s, double t, State& out) {
  out.t = t;
  std::copy(s.v.begin(), s.v.end(), out.u.begin());

  Vec& b = rhs_buf_;
  stiff_.multiply(s.u, b);
  for (double& x : b) x = -x;
  ops_.M_d1.multiply_add(-1.0, s.v, b);
  if (!all_zero(s.phi_x)) ops_.B_x.multiply_add(-1.0, s.phi_x, b);
  if (!all_zero(s.phi_y)) ops_.B_y.multiply_add(-1.0, s.phi_y, b);
  if (ops_.has_boundary_term) {
    ops_.R_v.multiply_add(-1.0, s.v, b);
    ops_.R_u.multiply_add(-1.0, s.u, b);
  }
  if (!forcing_.empty() && envelope_) {
    const double amp = envelope_(t);
    if (amp != 0.0)
      for (std::size_t i = 0; i < b.size(); ++i) b[i] += amp * forcing_[i];
  }
  apply_dirichlet(b, ops_.dirichlet);

  const CgResult res =
      conjugate_gradient(ops_.M_u, inv_diag_, b, warm_, cg_tol_, 20 * ops_.num_u() + 200);
  last_iterations_ = res.iterations;
  std::copy(warm_.begin(), warm_.end(), out.v.begin());

  if (!damped_) {
    std::fill(out.phi_x.begin(), out.phi_x.end(), 0.0);
    std::fill(out.phi_y.begin(), out.phi_y.end(), 0.0);
    return;
  }
  ops_.G_x.multiply(s.u, phi_buf_);
  inv_phi_.multiply(phi_buf_, out.phi_x);
  decay_x_.multiply_add(-1.0, s.phi_x, out.phi_x);
  ops_.G_y.multiply(s.u, phi_buf_);
  inv_phi_.multiply(phi_buf_, out.phi_y);
  decay_y_.multiply_add(-1.0, s.phi_y, out.phi_y);
}

void rk4_step(State& state, double dt, WaveSystem& system) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const double t = state.t;
  State k1 = system.zero_state(), k2 = k1, k3 = k1, k4 = k1;
  State stage = state;

  system.rhs(state, t, k1);
  stage.axpy(0.5 * dt, k1);
  system.rhs(stage, t + 0.5 * dt, k2);
  stage = state;
  stage.axpy(0.5 * dt, k2);
  system.rhs(stage, t + 0.5 * dt, k3);
  stage = state;
  stage.axpy(dt, k3);
  system.rhs(stage, t + dt, k4);

  state.axpy(dt / 6.0, k1);
  state.axpy(dt / 3.0, k2);
  state.axpy(dt / 3.0, k3);
  state.axpy(dt / 6.0, k4);
  state.t = t + dt;
  system.constrain(state);
}

EnergyForm energy_form(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                       const MaterialField& material, std::optional<Rect> subdomain) {
  ElementFilter filter;
  if (subdomain) {
    const double tol = 1e-9 * std::min(mesh.hx(), mesh.hy());
    filter = [&mesh, region = *subdomain, tol](std::size_t e) {
      const auto c = mesh.corners(e);
      return region.contains(c[0][0], c[0][1], tol) && region.contains(c[2][0], c[2][1], tol);
    };
  }
  EnergyForm f;
  f.M = assemble_mass(mesh, basis, cont, [&](double x, double y) { return 1.0 / material.kappa(x, y); },
                      filter);
  f.K = assemble_stiffness(mesh, basis, cont,
                           [&](double x, double y) { return 1.0 / material.rho(x, y); },
                           std::nullopt, filter);
  return f;
}

double energy(const State& state, const EnergyForm& form) {
  Vec tmp(state.u.size());
  form.M.multiply(state.v, tmp);
  double ev = 0.0;
  for (std::size_t i = 0; i < tmp.size(); ++i) ev += state.v[i] * tmp[i];
  form.K.multiply(state.u, tmp);
  double eu = 0.0;
  for (std::size_t i = 0; i < tmp.size(); ++i) eu += state.u[i] * tmp[i];
  return 0.5 * (ev + eu);
}

std::vector<std::size_t> nodes_in(const DofMap& cont, const MeshQ& mesh, const Rect& region) {
  const double tol = 1e-9 * std::min(mesh.hx(), mesh.hy());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cont.total_dofs; ++i)
    if (region.contains(cont.coords[i][0], cont.coords[i][1], tol)) out.push_back(i);
  return out;
}

double max_abs_at(const Vec& values, std::span<const std::size_t> nodes) {
  double m = 0.0;
  for (std::size_t i : nodes) m = std::max(m, std::abs(values[i]));
  return m;
}

std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw ConfigError("time stepping: dt and t_end must be positive");
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

std::size_t snapshot_step(double t, double dt) {
  const double ratio = t / dt;
  const double k = std::round(ratio);
  if (t < 0.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "snapshot time " << t << " is not an integer multiple of dt = " << dt;
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(k);
}

RunResult run(WaveSystem& system, State& state, const RunConfig& cfg, const Recorders& rec) {
  const std::size_t steps = step_count(cfg.t_end, cfg.dt);
  const std::size_t stride = std::max<std::size_t>(cfg.stride, 1);
  std::vector<std::size_t> snaps;
  for (double t : cfg.snapshot_times) snaps.push_back(snapshot_step(t, cfg.dt));
  std::sort(snaps.begin(), snaps.end());

  RunResult result;
  result.steps = steps;
  auto sample = [&](std::size_t k) {
    if (k % stride != 0 && k != steps) return;
    EnergySample s;
    s.t = state.t;
    if (rec.energy) s.E = energy(state, *rec.energy);
    if (!rec.amplitude_nodes.empty()) s.max_amp = max_abs_at(state.u, rec.amplitude_nodes);
    result.samples.push_back(s);
  };
  auto snapshot = [&](std::size_t k) {
    if (std::binary_search(snaps.begin(), snaps.end(), k)) {
      result.snapshot_times_hit.push_back(state.t);
      if (rec.on_snapshot) rec.on_snapshot(state);
    }
  };

  state.t = 0.0;
  sample(0);
  snapshot(0);
  if (rec.on_step) rec.on_step(state, 0);
  for (std::size_t k = 1; k <= steps; ++k) {
    rk4_step(state, cfg.dt, system);
    state.t = static_cast<double>(k) * cfg.dt;
    if (!state.all_finite()) {
      std::ostringstream msg;
      msg << "time stepping: non-finite state at t = " << state.t;
      throw NumericalError(msg.str());
    }
    sample(k);
    snapshot(k);
    if (rec.on_step) rec.on_step(state, k);
  }
  return result;
}

std::optional<std::string> cfl_warning(double h, int p, double c_max, double dt) {
  const double limit = 0.5 * h / (c_max * p * p);
  if (dt <= limit) return std::nullopt;
  std::ostringstream msg;
  msg << "dt = " << dt << " exceeds the heuristic limit 0.5 h/(c p^2) = " << limit;
  return msg.str();
}

}  // namespace pmlwave
