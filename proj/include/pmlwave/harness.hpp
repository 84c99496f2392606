#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmlwave/assembly.hpp"
#include "pmlwave/timestepper.hpp"

namespace pmlwave {

enum class Experiment { simulate, pml_error, longtime, convergence };

/// Every knob of an experiment. JSON keys are the snake_case field names.
struct SimulationConfig {
  Experiment experiment = Experiment::simulate;
  Rect domain{-6.0, 6.0, -6.0, 6.0};
  Rect reference_domain{-12.0, 12.0, -12.0, 12.0};
  double pml_width = 0.6;
  double h = 0.3;
  int p = 2;
  std::vector<double> h_list{0.6, 0.3};
  std::vector<int> p_list{1, 2};
  double r = -1.0;
  std::string material = "homogeneous";  // or "layered"
  double kappa = 1.0;
  double rho = 1.0;
  std::vector<double> layer_speeds{1.25, 1.0, 0.75};
  std::vector<double> layer_interfaces{-2.4, 2.4};
  double dt = 0.01;
  double t_end = 0.0;  // 0 selects the experiment default
  GaussianPulse forcing;
  double c0 = 2.0;
  double damping_exponent = 3.0;
  std::optional<double> d0;  // overrides the derived strength on every side
  std::string output_dir = "out";
  std::size_t recorder_stride = 1;
  std::vector<double> snapshot_times;
  bool snapshot_vtk = true;

  /// Omega_in: the domain shrunk by the layer width on every side.
  Rect inner() const;
  /// t_end, or 150 for long-time runs, 14 for layered media, 10 otherwise.
  double effective_t_end() const;
  MaterialField material_field() const;
  /// Throws ConfigError on invariant violations.
  void validate() const;
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Named preset: "small" (desk scale) or "paper" (full resolution).
SimulationConfig preset(const std::string& profile);

/// Overlay JSON text onto `base`. Unknown keys raise ConfigError naming the key path.
SimulationConfig parse_config_text(const std::string& json_text,
                                   const SimulationConfig& base = SimulationConfig{});
/// Read a config file; an empty file yields the defaults.
SimulationConfig parse_config(const std::string& path,
                              const SimulationConfig& base = SimulationConfig{});
/// JSON serialization of all effective values.
std::string serialize_config(const SimulationConfig& cfg);

/// Everything needed to time-step one domain.
struct Problem {
  MeshQ mesh;
  BasisQp basis;
  DofMap cont;
  DofMap disc;
  MaterialField material;
  PmlConfig pml;
};

/// Mesh, spaces and damping for `domain` at resolution (h, p). With
/// `damped` the layer strengths are derived from tol(C0, width, h, p) and
/// the local wave speed unless cfg.d0 overrides them.
Problem make_problem(const SimulationConfig& cfg, const Rect& domain, double h, int p, bool damped);

/// Operators plus the forcing profile wrapped into a time-steppable system.
WaveSystem make_system(const SimulationConfig& cfg, const Problem& problem);

struct PmlErrorSeries {
  int p = 0;
  double h = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> errors;
  double final_error = 0.0;
  double max_error = 0.0;
};

/// PML run on cfg.domain and undamped reference run on cfg.reference_domain
/// stepped in lockstep; the error is max |u_pml - u_ref| over the solution
/// nodes of Omega_in at every step.
PmlErrorSeries run_pml_error_experiment(const SimulationConfig& cfg, double h, int p);
PmlErrorSeries run_pml_error_experiment(const SimulationConfig& cfg);

struct AmplitudeSeries {
  std::vector<double> times;
  std::vector<double> max_amp;
};

/// Max |u| over the nodes of Omega_in every recorder_stride steps.
AmplitudeSeries run_longtime_experiment(const SimulationConfig& cfg);

struct ConvergenceRow {
  int p = 0;
  double h = 0.0;
  double final_error = 0.0;
  std::optional<double> order;  // vs. the previous (coarser) h of the same p
};

std::vector<ConvergenceRow> run_convergence_study(const SimulationConfig& cfg);

struct SimulationResult {
  std::vector<EnergySample> samples;  // E over Omega_in, max |u| over Omega_in
  std::vector<std::string> snapshot_files;
  std::size_t steps = 0;
};

/// Plain PML run with energy/amplitude recording and snapshot export.
SimulationResult run_simulation(const SimulationConfig& cfg);

enum class SnapshotFormat { csv, vtk };

/// Node coordinates and u values. CSV has header x,y,u; VTK is a legacy ASCII
/// structured grid over the node lattice.
void export_snapshot(const Vec& u, const MeshQ& mesh, const DofMap& cont, const std::string& path,
                     SnapshotFormat format);

/// Write a CSV with the given header and rows, 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Dump the assembled operators of `problem` as MatrixMarket files into `dir`.
std::vector<std::string> dump_matrices(const SimulationConfig& cfg, const Problem& problem,
                                       const std::string& dir);

}  // namespace pmlwave
