#include "pmlwave/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pmlwave/errors.hpp"

namespace pmlwave {

using nlohmann::json;

namespace {

Rect rect_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 4)
    throw ConfigError(key + ": expected [x0, x1, y0, y1]");
  Rect r{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw ConfigError(key + ": empty rectangle");
  return r;
}

json rect_to_json(const Rect& r) { return json::array({r.x0, r.x1, r.y0, r.y1}); }

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown configuration key '" + prefix + it.key() + "'");
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::simulate: return "simulate";
    case Experiment::pml_error: return "pml_error";
    case Experiment::longtime: return "longtime";
    case Experiment::convergence: return "convergence";
  }
  return "simulate";
}

Experiment experiment_from_string(const std::string& name) {
  if (name == "simulate") return Experiment::simulate;
  if (name == "pml_error" || name == "pml-error") return Experiment::pml_error;
  if (name == "longtime") return Experiment::longtime;
  if (name == "convergence") return Experiment::convergence;
  throw ConfigError("experiment: unknown kind '" + name + "'");
}

Rect SimulationConfig::inner() const {
  return {domain.x0 + pml_width, domain.x1 - pml_width, domain.y0 + pml_width,
          domain.y1 - pml_width};
}

double SimulationConfig::effective_t_end() const {
  if (t_end > 0.0) return t_end;
  if (experiment == Experiment::longtime) return 150.0;
  if (material == "layered") return 14.0;
  return 10.0;
}

MaterialField SimulationConfig::material_field() const {
  if (material == "homogeneous") return MaterialField::homogeneous(kappa, rho);
  if (material == "layered") return MaterialField::layered(layer_speeds, layer_interfaces);
  throw ConfigError("material: expected 'homogeneous' or 'layered', got '" + material + "'");
}

void SimulationConfig::validate() const {
  if (!(pml_width > 0.0)) throw ConfigError("pml_width: must be positive");
  const Rect in = inner();
  if (!(in.x1 > in.x0) || !(in.y1 > in.y0)) throw ConfigError("pml_width: leaves no interior domain");
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (t_end < 0.0) throw ConfigError("t_end: must be non-negative");
  if (!(r >= -1.0 && r <= 1.0)) throw ConfigError("r: must lie in [-1, 1]");
  if (p < 1 || p > 8) throw ConfigError("p: must lie in [1, 8]");
  for (int q : p_list)
    if (q < 1 || q > 8) throw ConfigError("p_list: orders must lie in [1, 8]");
  if (!(c0 > 0.0)) throw ConfigError("c0: must be positive");
  if (d0 && !(*d0 >= 0.0)) throw ConfigError("d0: must be non-negative");
  if (recorder_stride == 0) throw ConfigError("recorder_stride: must be at least 1");
  if (!(forcing.sigma > 0.0) || !(forcing.tau > 0.0))
    throw ConfigError("forcing: sigma and tau must be positive");
  if (!(reference_domain.x0 <= domain.x0 && reference_domain.x1 >= domain.x1 &&
        reference_domain.y0 <= domain.y0 && reference_domain.y1 >= domain.y1))
    throw ConfigError("reference_domain: must contain domain");
  MaterialField mat;
  try {
    mat = material_field();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
  std::vector<double> hs = h_list;
  hs.push_back(h);
  for (double hh : hs) {
    if (!(hh > 0.0)) throw ConfigError("h: must be positive");
    const MeshQ mesh = build_cartesian_mesh(domain, hh);
    check_interface_alignment(mesh, mat);
    if (experiment == Experiment::pml_error || experiment == Experiment::convergence) {
      const MeshQ ref = build_cartesian_mesh(reference_domain, hh);
      check_interface_alignment(ref, mat);
      // Nodes of the two meshes must coincide.
      const double off = (domain.x0 - reference_domain.x0) / hh;
      const double offy = (domain.y0 - reference_domain.y0) / hh;
      if (std::abs(off - std::round(off)) > 1e-9 * std::max(1.0, off) ||
          std::abs(offy - std::round(offy)) > 1e-9 * std::max(1.0, offy))
        throw ConfigError("reference_domain: mesh lines do not coincide with those of domain");
    }
  }
  for (double t : snapshot_times) snapshot_step(t, dt);
}

SimulationConfig preset(const std::string& profile) {
  SimulationConfig cfg;
  if (profile == "small") {
    cfg.h = 0.3;
    cfg.p = 2;
    cfg.h_list = {0.6, 0.3};
    cfg.p_list = {1, 2};
    return cfg;
  }
  if (profile == "paper") {
    cfg.h = 0.15;
    cfg.p = 3;
    cfg.h_list = {0.6, 0.3, 0.15};
    cfg.p_list = {1, 2, 3};
    cfg.snapshot_times = {2.0, 4.0, 6.0, 12.0};
    return cfg;
  }
  throw ConfigError("profile: expected 'small' or 'paper', got '" + profile + "'");
}

SimulationConfig parse_config_text(const std::string& json_text, const SimulationConfig& base) {
  SimulationConfig cfg = base;
  const auto first = json_text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    cfg.validate();
    return cfg;
  }
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j,
             {"experiment", "domain", "reference_domain", "pml_width", "h", "p", "h_list", "p_list",
              "r", "material", "kappa", "rho", "layer_speeds", "layer_interfaces", "dt", "t_end",
              "forcing", "c0", "damping_exponent", "d0", "output_dir", "recorder_stride",
              "snapshot_times", "snapshot_vtk"},
             "");
  if (j.contains("experiment")) cfg.experiment = experiment_from_string(get_as<std::string>(j["experiment"], "experiment"));
  if (j.contains("domain")) cfg.domain = rect_from_json(j["domain"], "domain");
  if (j.contains("reference_domain")) cfg.reference_domain = rect_from_json(j["reference_domain"], "reference_domain");
  if (j.contains("pml_width")) cfg.pml_width = get_as<double>(j["pml_width"], "pml_width");
  if (j.contains("h")) cfg.h = get_as<double>(j["h"], "h");
  if (j.contains("p")) cfg.p = get_as<int>(j["p"], "p");
  if (j.contains("h_list")) cfg.h_list = get_as<std::vector<double>>(j["h_list"], "h_list");
  if (j.contains("p_list")) cfg.p_list = get_as<std::vector<int>>(j["p_list"], "p_list");
  if (j.contains("r")) cfg.r = get_as<double>(j["r"], "r");
  if (j.contains("material")) cfg.material = get_as<std::string>(j["material"], "material");
  if (j.contains("kappa")) cfg.kappa = get_as<double>(j["kappa"], "kappa");
  if (j.contains("rho")) cfg.rho = get_as<double>(j["rho"], "rho");
  if (j.contains("layer_speeds")) cfg.layer_speeds = get_as<std::vector<double>>(j["layer_speeds"], "layer_speeds");
  if (j.contains("layer_interfaces")) cfg.layer_interfaces = get_as<std::vector<double>>(j["layer_interfaces"], "layer_interfaces");
  if (j.contains("dt")) cfg.dt = get_as<double>(j["dt"], "dt");
  if (j.contains("t_end")) cfg.t_end = j["t_end"].is_null() ? 0.0 : get_as<double>(j["t_end"], "t_end");
  if (j.contains("forcing")) {
    const json& f = j["forcing"];
    if (!f.is_object()) throw ConfigError("forcing: expected an object");
    check_keys(f, {"amplitude", "sigma", "x0", "y0", "t0", "tau", "cutoff"}, "forcing.");
    if (f.contains("amplitude")) cfg.forcing.amplitude = get_as<double>(f["amplitude"], "forcing.amplitude");
    if (f.contains("sigma")) cfg.forcing.sigma = get_as<double>(f["sigma"], "forcing.sigma");
    if (f.contains("x0")) cfg.forcing.x0 = get_as<double>(f["x0"], "forcing.x0");
    if (f.contains("y0")) cfg.forcing.y0 = get_as<double>(f["y0"], "forcing.y0");
    if (f.contains("t0")) cfg.forcing.t0 = get_as<double>(f["t0"], "forcing.t0");
    if (f.contains("tau")) cfg.forcing.tau = get_as<double>(f["tau"], "forcing.tau");
    if (f.contains("cutoff"))
      cfg.forcing.cutoff = f["cutoff"].is_null() ? std::numeric_limits<double>::infinity()
                                                 : get_as<double>(f["cutoff"], "forcing.cutoff");
  }
  if (j.contains("c0")) cfg.c0 = get_as<double>(j["c0"], "c0");
  if (j.contains("damping_exponent")) cfg.damping_exponent = get_as<double>(j["damping_exponent"], "damping_exponent");
  if (j.contains("d0")) {
    if (j["d0"].is_null()) cfg.d0.reset();
    else cfg.d0 = get_as<double>(j["d0"], "d0");
  }
  if (j.contains("output_dir")) cfg.output_dir = get_as<std::string>(j["output_dir"], "output_dir");
  if (j.contains("recorder_stride")) cfg.recorder_stride = get_as<std::size_t>(j["recorder_stride"], "recorder_stride");
  if (j.contains("snapshot_times")) cfg.snapshot_times = get_as<std::vector<double>>(j["snapshot_times"], "snapshot_times");
  if (j.contains("snapshot_vtk")) cfg.snapshot_vtk = get_as<bool>(j["snapshot_vtk"], "snapshot_vtk");
  cfg.validate();
  return cfg;
}

SimulationConfig parse_config(const std::string& path, const SimulationConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), base);
}

std::string serialize_config(const SimulationConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["domain"] = rect_to_json(cfg.domain);
  j["reference_domain"] = rect_to_json(cfg.reference_domain);
  j["pml_width"] = cfg.pml_width;
  j["h"] = cfg.h;
  j["p"] = cfg.p;
  j["h_list"] = cfg.h_list;
  j["p_list"] = cfg.p_list;
  j["r"] = cfg.r;
  j["material"] = cfg.material;
  j["kappa"] = cfg.kappa;
  j["rho"] = cfg.rho;
  j["layer_speeds"] = cfg.layer_speeds;
  j["layer_interfaces"] = cfg.layer_interfaces;
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.effective_t_end();
  json f;
  f["amplitude"] = cfg.forcing.amplitude;
  f["sigma"] = cfg.forcing.sigma;
  f["x0"] = cfg.forcing.x0;
  f["y0"] = cfg.forcing.y0;
  f["t0"] = cfg.forcing.t0;
  f["tau"] = cfg.forcing.tau;
  f["cutoff"] = std::isfinite(cfg.forcing.cutoff) ? json(cfg.forcing.cutoff) : json(nullptr);
  j["forcing"] = f;
  j["c0"] = cfg.c0;
  j["damping_exponent"] = cfg.damping_exponent;
  j["d0"] = cfg.d0 ? json(*cfg.d0) : json(nullptr);
  j["output_dir"] = cfg.output_dir;
  j["recorder_stride"] = cfg.recorder_stride;
  j["snapshot_times"] = cfg.snapshot_times;
  j["snapshot_vtk"] = cfg.snapshot_vtk;
  return j.dump(2);
}

Problem make_problem(const SimulationConfig& cfg, const Rect& domain, double h, int p, bool damped) {
  MeshQ mesh = build_cartesian_mesh(domain, h);
  MaterialField material = cfg.material_field();
  check_interface_alignment(mesh, material);
  PmlConfig pml = PmlConfig::none();
  if (damped) {
    pml = PmlConfig::around(domain, cfg.pml_width, 0.0);
    pml.exponent = cfg.damping_exponent;
    pml.c0 = cfg.c0;
    if (cfg.d0) pml.d0 = {*cfg.d0, *cfg.d0, *cfg.d0, *cfg.d0};
    else pml.d0 = strengths_from_material(domain, pml, material, h, p);
  }
  BasisQp basis(p);
  DofMap cont = dof_map(mesh, p, SpaceKind::continuous);
  DofMap disc = dof_map(mesh, p, SpaceKind::discontinuous);
  return {std::move(mesh), std::move(basis), std::move(cont), std::move(disc), std::move(material), pml};
}

WaveSystem make_system(const SimulationConfig& cfg, const Problem& pr) {
  Operators ops = assemble_all(pr.mesh, pr.basis, pr.cont, pr.disc, pr.material, pr.pml, cfg.r);
  const GaussianPulse pulse = cfg.forcing;
  Vec profile = assemble_forcing(pr.mesh, pr.basis, pr.cont, pr.material,
                                 {[&](double x, double y) { return pulse.spatial(x, y); }, {}}, 0.0);
  return WaveSystem(std::move(ops), std::move(profile), [pulse](double t) { return pulse.envelope(t); });
}

namespace {

double max_wave_speed(const MaterialField& m, const Rect& r) {
  double c = 0.0;
  for (int j = 0; j <= 200; ++j)
    for (int i = 0; i <= 20; ++i)
      c = std::max(c, m.wave_speed(r.x0 + r.width() * i / 20.0, r.y0 + r.height() * j / 200.0));
  return c;
}

void warn_cfl(const SimulationConfig& cfg, const Problem& pr, double h, int p) {
  if (auto w = cfl_warning(h, p, max_wave_speed(pr.material, pr.mesh.domain()), cfg.dt))
    std::cerr << "warning: " << *w << '\n';
}

}  // namespace

PmlErrorSeries run_pml_error_experiment(const SimulationConfig& cfg, double h, int p) {
  const Problem pml_pr = make_problem(cfg, cfg.domain, h, p, true);
  const Problem ref_pr = make_problem(cfg, cfg.reference_domain, h, p, false);
  warn_cfl(cfg, ref_pr, h, p);
  const double t_end = cfg.effective_t_end();
  {
    const double c_max = max_wave_speed(ref_pr.material, cfg.reference_domain);
    const Rect in = cfg.inner();
    const double gap = std::min({in.x0 - cfg.reference_domain.x0, cfg.reference_domain.x1 - in.x1,
                                 in.y0 - cfg.reference_domain.y0, cfg.reference_domain.y1 - in.y1});
    if (c_max * t_end > 2.0 * gap + (in.width() + in.height()) / 4.0)
      std::cerr << "warning: reflections from the reference boundary may reach the interior\n";
  }

  const auto inner_nodes = nodes_in(pml_pr.cont, pml_pr.mesh, cfg.inner());
  std::vector<std::size_t> ref_nodes;
  ref_nodes.reserve(inner_nodes.size());
  for (std::size_t i : inner_nodes) {
    const auto& c = pml_pr.cont.coords[i];
    const auto k = locate_node(ref_pr.cont, ref_pr.mesh, c[0], c[1]);
    if (!k) throw std::logic_error("pml error: node mismatch between PML and reference meshes");
    ref_nodes.push_back(*k);
  }

  WaveSystem pml_sys = make_system(cfg, pml_pr);
  WaveSystem ref_sys = make_system(cfg, ref_pr);
  State a = pml_sys.zero_state();
  State b = ref_sys.zero_state();
  PmlErrorSeries out;
  out.p = p;
  out.h = h;
  out.dt = cfg.dt;
  const std::size_t steps = step_count(t_end, cfg.dt);
  auto record = [&](std::size_t k) {
    double err = 0.0;
    for (std::size_t n = 0; n < inner_nodes.size(); ++n)
      err = std::max(err, std::abs(a.u[inner_nodes[n]] - b.u[ref_nodes[n]]));
    out.max_error = std::max(out.max_error, err);
    if (k % cfg.recorder_stride == 0 || k == steps) {
      out.times.push_back(static_cast<double>(k) * cfg.dt);
      out.errors.push_back(err);
    }
    out.final_error = err;
  };
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    rk4_step(a, cfg.dt, pml_sys);
    rk4_step(b, cfg.dt, ref_sys);
    a.t = b.t = static_cast<double>(k) * cfg.dt;
    if (!a.all_finite() || !b.all_finite())
      throw NumericalError("pml error: non-finite state at t = " + std::to_string(a.t));
    record(k);
  }
  return out;
}

PmlErrorSeries run_pml_error_experiment(const SimulationConfig& cfg) {
  return run_pml_error_experiment(cfg, cfg.h, cfg.p);
}

AmplitudeSeries run_longtime_experiment(const SimulationConfig& cfg) {
  const Problem pr = make_problem(cfg, cfg.domain, cfg.h, cfg.p, true);
  warn_cfl(cfg, pr, cfg.h, cfg.p);
  WaveSystem sys = make_system(cfg, pr);
  State st = sys.zero_state();
  RunConfig rc;
  rc.dt = cfg.dt;
  rc.t_end = cfg.effective_t_end();
  rc.stride = cfg.recorder_stride;
  Recorders rec;
  rec.amplitude_nodes = nodes_in(pr.cont, pr.mesh, cfg.inner());
  const RunResult res = run(sys, st, rc, rec);
  AmplitudeSeries out;
  for (const auto& s : res.samples) {
    out.times.push_back(s.t);
    out.max_amp.push_back(s.max_amp);
  }
  return out;
}

std::vector<ConvergenceRow> run_convergence_study(const SimulationConfig& cfg) {
  std::vector<double> hs = cfg.h_list;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  if (hs.size() < 2) throw ConfigError("h_list: a convergence study needs at least two mesh sizes");
  std::vector<ConvergenceRow> rows;
  for (int p : cfg.p_list) {
    std::optional<double> prev_err, prev_h;
    for (double h : hs) {
      const PmlErrorSeries s = run_pml_error_experiment(cfg, h, p);
      ConvergenceRow row{p, h, s.final_error, std::nullopt};
      if (prev_err) row.order = std::log(*prev_err / s.final_error) / std::log(*prev_h / h);
      rows.push_back(row);
      prev_err = s.final_error;
      prev_h = h;
    }
  }
  return rows;
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  const Problem pr = make_problem(cfg, cfg.domain, cfg.h, cfg.p, true);
  warn_cfl(cfg, pr, cfg.h, cfg.p);
  WaveSystem sys = make_system(cfg, pr);
  State st = sys.zero_state();
  const EnergyForm form = energy_form(pr.mesh, pr.basis, pr.cont, pr.material, cfg.inner());
  RunConfig rc;
  rc.dt = cfg.dt;
  rc.t_end = cfg.effective_t_end();
  rc.stride = cfg.recorder_stride;
  rc.snapshot_times = cfg.snapshot_times;
  Recorders rec;
  rec.energy = &form;
  rec.amplitude_nodes = nodes_in(pr.cont, pr.mesh, cfg.inner());
  SimulationResult out;
  rec.on_snapshot = [&](const State& s) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ostringstream name;
    name << cfg.output_dir << "/snapshot_t" << std::fixed << std::setprecision(2) << s.t;
    export_snapshot(s.u, pr.mesh, pr.cont, name.str() + ".csv", SnapshotFormat::csv);
    out.snapshot_files.push_back(name.str() + ".csv");
    if (cfg.snapshot_vtk) {
      export_snapshot(s.u, pr.mesh, pr.cont, name.str() + ".vtk", SnapshotFormat::vtk);
      out.snapshot_files.push_back(name.str() + ".vtk");
    }
  };
  const RunResult res = run(sys, st, rc, rec);
  out.samples = res.samples;
  out.steps = res.steps;
  return out;
}

void export_snapshot(const Vec& u, const MeshQ& mesh, const DofMap& cont, const std::string& path,
                     SnapshotFormat format) {
  if (cont.kind != SpaceKind::continuous || u.size() != cont.total_dofs)
    throw std::invalid_argument("export_snapshot: expects a continuous-space vector");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_snapshot: cannot open '" + path + "' for writing");
  os << std::setprecision(17);
  if (format == SnapshotFormat::csv) {
    os << "x,y,u\n";
    for (std::size_t i = 0; i < u.size(); ++i)
      os << cont.coords[i][0] << ',' << cont.coords[i][1] << ',' << u[i] << '\n';
  } else {
    const std::size_t lx = mesh.nx() * static_cast<std::size_t>(cont.order) + 1;
    const std::size_t ly = mesh.ny() * static_cast<std::size_t>(cont.order) + 1;
    os << "# vtk DataFile Version 3.0\n";
    os << "pmlwave snapshot\n";
    os << "ASCII\n";
    os << "DATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << lx << ' ' << ly << " 1\n";
    os << "POINTS " << u.size() << " double\n";
    for (std::size_t i = 0; i < u.size(); ++i)
      os << cont.coords[i][0] << ' ' << cont.coords[i][1] << " 0\n";
    os << "POINT_DATA " << u.size() << '\n';
    os << "SCALARS u double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (double v : u) os << v << '\n';
  }
  if (!os) throw std::runtime_error("export_snapshot: write to '" + path + "' failed");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << std::setprecision(17);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

std::vector<std::string> dump_matrices(const SimulationConfig& cfg, const Problem& pr,
                                       const std::string& dir) {
  std::filesystem::create_directories(dir);
  const Operators ops = assemble_all(pr.mesh, pr.basis, pr.cont, pr.disc, pr.material, pr.pml, cfg.r);
  std::vector<std::pair<std::string, const CsrMatrix*>> mats = {
      {"M_u", &ops.M_u}, {"M_d1", &ops.M_d1}, {"M_d0", &ops.M_d0}, {"K", &ops.K},
      {"B_x", &ops.B_x}, {"B_y", &ops.B_y},   {"G_x", &ops.G_x},   {"G_y", &ops.G_y}};
  if (ops.has_boundary_term) {
    mats.emplace_back("R_v", &ops.R_v);
    mats.emplace_back("R_u", &ops.R_u);
  }
  std::vector<std::string> files;
  for (const auto& [name, m] : mats) {
    const std::string path = dir + "/" + name + ".mtx";
    write_matrix_market(*m, path);
    files.push_back(path);
  }
  return files;
}

}  // namespace pmlwave
