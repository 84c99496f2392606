#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pmlwave/errors.hpp"
#include "pmlwave/harness.hpp"
#include "pmlwave/laplace_lab.hpp"

namespace py = pybind11;
using namespace pmlwave;

namespace {

template <typename T>
py::array_t<T> as_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::tuple csr_tuple(const CsrMatrix& A) {
  return py::make_tuple(as_array(A.values), as_array(A.col_idx), as_array(A.row_ptr),
                        py::make_tuple(A.rows, A.cols));
}

SimulationConfig config_from(const std::string& json_text, const std::string& profile) {
  return parse_config_text(json_text, preset(profile));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Acoustic wave solver with perfectly matched layers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);

  m.def("gauss_legendre_rule", [](int n) {
    const QuadRule1D r = gauss_legendre_rule(n);
    return py::make_tuple(as_array(r.nodes), as_array(r.weights));
  }, py::arg("n"));
  m.def("gauss_lobatto_nodes", [](int p) { return as_array(gauss_lobatto_nodes(p)); }, py::arg("p"));

  m.def("tolerance", &tolerance, py::arg("c0"), py::arg("width"), py::arg("h"), py::arg("p"));
  m.def("damping_strength", &damping_strength, py::arg("c"), py::arg("width"), py::arg("tol"));
  m.def("stretch", [](Complex s, double d) { return stretch(s, d).value; }, py::arg("s"), py::arg("d"));
  m.def("spectral_identity_residual", &spectral_identity_residual, py::arg("s"), py::arg("d"));

  m.def("default_config", [](const std::string& profile) { return serialize_config(preset(profile)); },
        py::arg("profile") = "small");
  m.def("normalize_config", [](const std::string& text, const std::string& profile) {
    return serialize_config(config_from(text, profile));
  }, py::arg("config_json"), py::arg("profile") = "small");

  m.def("assemble", [](const std::string& text, const std::string& profile) {
    const SimulationConfig cfg = config_from(text, profile);
    const Problem pr = make_problem(cfg, cfg.domain, cfg.h, cfg.p, true);
    const Operators ops = assemble_all(pr.mesh, pr.basis, pr.cont, pr.disc, pr.material, pr.pml, cfg.r);
    py::dict out;
    out["M_u"] = csr_tuple(ops.M_u);
    out["K"] = csr_tuple(ops.K);
    out["M_d1"] = csr_tuple(ops.M_d1);
    out["M_d0"] = csr_tuple(ops.M_d0);
    out["B_x"] = csr_tuple(ops.B_x);
    out["B_y"] = csr_tuple(ops.B_y);
    out["G_x"] = csr_tuple(ops.G_x);
    out["G_y"] = csr_tuple(ops.G_y);
    std::vector<double> xy;
    for (const auto& c : pr.cont.coords) xy.insert(xy.end(), c.begin(), c.end());
    out["coords"] = as_array(xy).reshape({static_cast<py::ssize_t>(pr.cont.total_dofs), py::ssize_t{2}});
    out["dirichlet"] = as_array(ops.dirichlet);
    return out;
  }, py::arg("config_json") = "", py::arg("profile") = "small");

  m.def("simulate", [](const std::string& text, const std::string& profile) {
    SimulationConfig cfg = config_from(text, profile);
    cfg.experiment = Experiment::simulate;
    py::gil_scoped_release release;
    const SimulationResult r = run_simulation(cfg);
    py::gil_scoped_acquire acquire;
    std::vector<double> t, e, a;
    for (const auto& s : r.samples) {
      t.push_back(s.t);
      e.push_back(s.E);
      a.push_back(s.max_amp);
    }
    py::dict out;
    out["t"] = as_array(t);
    out["energy"] = as_array(e);
    out["max_abs_u"] = as_array(a);
    out["snapshot_files"] = r.snapshot_files;
    return out;
  }, py::arg("config_json") = "", py::arg("profile") = "small");

  m.def("pml_error", [](const std::string& text, const std::string& profile) {
    SimulationConfig cfg = config_from(text, profile);
    cfg.experiment = Experiment::pml_error;
    PmlErrorSeries s;
    {
      py::gil_scoped_release release;
      s = run_pml_error_experiment(cfg);
    }
    py::dict out;
    out["t"] = as_array(s.times);
    out["error"] = as_array(s.errors);
    out["final_error"] = s.final_error;
    out["max_error"] = s.max_error;
    out["p"] = s.p;
    out["h"] = s.h;
    return out;
  }, py::arg("config_json") = "", py::arg("profile") = "small");

  m.def("longtime", [](const std::string& text, const std::string& profile) {
    SimulationConfig cfg = config_from(text, profile);
    cfg.experiment = Experiment::longtime;
    AmplitudeSeries s;
    {
      py::gil_scoped_release release;
      s = run_longtime_experiment(cfg);
    }
    py::dict out;
    out["t"] = as_array(s.times);
    out["max_abs_u"] = as_array(s.max_amp);
    return out;
  }, py::arg("config_json") = "", py::arg("profile") = "small");

  m.def("convergence", [](const std::string& text, const std::string& profile) {
    SimulationConfig cfg = config_from(text, profile);
    cfg.experiment = Experiment::convergence;
    std::vector<ConvergenceRow> rows;
    {
      py::gil_scoped_release release;
      rows = run_convergence_study(cfg);
    }
    py::list out;
    for (const auto& r : rows) {
      py::dict d;
      d["p"] = r.p;
      d["h"] = r.h;
      d["final_error"] = r.final_error;
      d["order"] = r.order ? py::object(py::float_(*r.order)) : py::none();
      out.append(d);
    }
    return out;
  }, py::arg("config_json") = "", py::arg("profile") = "small");

  m.def("manufactured_convergence", [](int p, const std::vector<double>& hs, Complex s, double d) {
    const ConvergenceReport r = manufactured_convergence(p, hs, s, d);
    return py::make_tuple(as_array(r.errors), as_array(r.orders));
  }, py::arg("p"), py::arg("hs"), py::arg("s"), py::arg("d"));

  m.def("laplace_verify", [](std::uint64_t seed) {
    const auto rows = run_laplace_verification(seed);
    py::list out;
    for (const auto& r : rows) {
      py::dict d;
      d["check"] = r.check;
      d["p"] = r.p;
      d["h"] = r.h;
      d["s"] = r.s;
      d["d_x"] = r.dx;
      d["d_y"] = r.dy;
      d["lhs"] = r.lhs;
      d["rhs"] = r.rhs;
      d["margin_or_order"] = r.margin_or_order;
      d["pass"] = r.pass;
      out.append(d);
    }
    return out;
  }, py::arg("seed") = 20240601);
}
