#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pmlwave/assembly.hpp"

namespace pmlwave {

/// Solution u, its time derivative v, and the two auxiliary fields.
struct State {
  Vec u;
  Vec v;
  Vec phi_x;
  Vec phi_y;
  double t = 0.0;

  /// this += alpha * other (time is left untouched).
  void axpy(double alpha, const State& other);
  bool all_finite() const;
};

struct EnergySample {
  double t = 0.0;
  double E = 0.0;
  double max_amp = 0.0;
};

/// Semi-discrete 2D PML system
///
///   u' = v
///   M_u v' = -(K + M_d0) u - M_d1 v - B_x phi_x - B_y phi_y - R_v v - R_u u + F(t)
///   M_phi phi_eta' = -M_phi,d_eta phi_eta + G_eta u
///
/// with the mass system solved by Jacobi-preconditioned CG (relative
/// residual 1e-12, warm-started from the previous solve) and the
/// discontinuous mass inverted block by block.
class WaveSystem {
 public:
  /// `forcing_profile` is (F_spatial/kappa, v_i)_h; the load at time t is
  /// envelope(t) * forcing_profile. Operators assembled with r = -1 are
  /// constrained here.
  WaveSystem(Operators ops, Vec forcing_profile, std::function<double(double)> envelope);
  explicit WaveSystem(Operators ops);

  const Operators& operators() const { return ops_; }
  State zero_state() const;

  /// Time derivative of `state` at time t.
  State rhs(const State& state, double t);
  void rhs(const State& state, double t, State& out);

  double cg_tolerance() const { return cg_tol_; }
  std::size_t last_cg_iterations() const { return last_iterations_; }
  bool damped() const { return damped_; }

  /// Zero the Dirichlet entries of u and v (no-op unless r = -1).
  void constrain(State& state) const;

 private:
  Operators ops_;
  CsrMatrix stiff_;  // K + M_d0
  std::vector<double> inv_diag_;
  BlockDiagonal inv_phi_;
  BlockDiagonal decay_x_;  // M_phi^{-1} M_phi,dx
  BlockDiagonal decay_y_;
  Vec forcing_;
  std::function<double(double)> envelope_;
  bool damped_ = false;
  double cg_tol_ = 1e-12;
  Vec warm_;
  Vec rhs_buf_;
  Vec phi_buf_;
  std::size_t last_iterations_ = 0;
};

/// One classical RK4 step of size dt. Dirichlet entries are re-zeroed after
/// the update.
void rk4_step(State& state, double dt, WaveSystem& system);

/// Quadratic forms defining E = 1/2 (v^T M v + u^T K u) over a set of elements.
struct EnergyForm {
  CsrMatrix M;
  CsrMatrix K;
};

/// Energy forms over the whole mesh, or over the elements lying inside
/// `subdomain` when given.
EnergyForm energy_form(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                       const MaterialField& material, std::optional<Rect> subdomain = std::nullopt);

double energy(const State& state, const EnergyForm& form);

/// Continuous DOFs whose node lies in `region` (closed, 1e-9 h tolerance).
std::vector<std::size_t> nodes_in(const DofMap& cont, const MeshQ& mesh, const Rect& region);

double max_abs_at(const Vec& values, std::span<const std::size_t> nodes);

struct RunConfig {
  double dt = 0.01;
  double t_end = 10.0;
  std::size_t stride = 1;
  std::vector<double> snapshot_times;
};

/// Observers of a time integration. All callbacks receive read-only views.
struct Recorders {
  const EnergyForm* energy = nullptr;
  std::vector<std::size_t> amplitude_nodes;
  /// Called after every step (and once for the initial state with step 0).
  std::function<void(const State&, std::size_t step)> on_step;
  std::function<void(const State&)> on_snapshot;
};

struct RunResult {
  std::size_t steps = 0;
  std::vector<EnergySample> samples;
  std::vector<double> snapshot_times_hit;
};

/// Number of steps for t_end at step dt: ceil(t_end / dt).
std::size_t step_count(double t_end, double dt);
/// Step index of snapshot time t; throws ConfigError unless dt divides t.
std::size_t snapshot_step(double t, double dt);

/// Fixed-step RK4 loop from state.t = 0 to t_end.
RunResult run(WaveSystem& system, State& state, const RunConfig& cfg, const Recorders& rec);

/// Heuristic stability warning when dt > 0.5 h / (c_max p^2); empty otherwise.
std::optional<std::string> cfl_warning(double h, int p, double c_max, double dt);

}  // namespace pmlwave
