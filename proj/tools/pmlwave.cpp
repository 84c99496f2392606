#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pmlwave/errors.hpp"
#include "pmlwave/harness.hpp"
#include "pmlwave/laplace_lab.hpp"

namespace fs = std::filesystem;
using namespace pmlwave;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kAcceptanceFailure = 4;

struct Options {
  std::string config;
  std::string profile = "small";
  std::string out;
  bool dump = false;
  std::string snapshot_times;
};

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--snapshot-times: cannot parse '" + item + "'");
    }
  }
  return out;
}

SimulationConfig load(const Options& opt, Experiment kind) {
  SimulationConfig base = preset(opt.profile);
  base.experiment = kind;
  SimulationConfig cfg = opt.config.empty() ? base : parse_config(opt.config, base);
  cfg.experiment = kind;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (!opt.snapshot_times.empty()) cfg.snapshot_times = parse_times(opt.snapshot_times);
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  std::ofstream(cfg.output_dir + "/config.json") << serialize_config(cfg) << '\n';
  return cfg;
}

void maybe_dump(const Options& opt, const SimulationConfig& cfg) {
  if (!opt.dump) return;
  const Problem pr = make_problem(cfg, cfg.domain, cfg.h, cfg.p, true);
  for (const auto& f : dump_matrices(cfg, pr, cfg.output_dir + "/matrices")) std::cout << "wrote " << f << '\n';
}

int cmd_simulate(const Options& opt) {
  const SimulationConfig cfg = load(opt, Experiment::simulate);
  maybe_dump(opt, cfg);
  const SimulationResult res = run_simulation(cfg);
  std::vector<std::vector<double>> rows;
  for (const auto& s : res.samples) rows.push_back({s.t, s.E, s.max_amp});
  write_csv(cfg.output_dir + "/energy.csv", {"t", "energy", "max_abs_u"}, rows);
  std::cout << "steps: " << res.steps << ", snapshots: " << res.snapshot_files.size() << '\n';
  return 0;
}

int cmd_pml_error(const Options& opt) {
  const SimulationConfig cfg = load(opt, Experiment::pml_error);
  maybe_dump(opt, cfg);
  const PmlErrorSeries s = run_pml_error_experiment(cfg);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.times.size(); ++i) rows.push_back({s.times[i], s.errors[i]});
  write_csv(cfg.output_dir + "/pml_error.csv", {"t", "max_error"}, rows);
  std::cout.precision(6);
  std::cout << "p = " << s.p << ", h = " << s.h << ": final error " << s.final_error
            << ", max error " << s.max_error << '\n';
  return 0;
}

int cmd_longtime(const Options& opt) {
  const SimulationConfig cfg = load(opt, Experiment::longtime);
  maybe_dump(opt, cfg);
  const AmplitudeSeries s = run_longtime_experiment(cfg);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.times.size(); ++i) rows.push_back({s.times[i], s.max_amp[i]});
  write_csv(cfg.output_dir + "/longtime.csv", {"t", "max_abs_u"}, rows);
  return 0;
}

int cmd_convergence(const Options& opt) {
  const SimulationConfig cfg = load(opt, Experiment::convergence);
  maybe_dump(opt, cfg);
  const auto table = run_convergence_study(cfg);
  std::vector<std::vector<double>> rows;
  for (const auto& r : table) {
    rows.push_back({static_cast<double>(r.p), r.h, r.final_error,
                    r.order.value_or(std::numeric_limits<double>::quiet_NaN())});
    std::cout << "p = " << r.p << ", h = " << r.h << ": error " << r.final_error;
    if (r.order) std::cout << ", order " << *r.order;
    std::cout << '\n';
  }
  write_csv(cfg.output_dir + "/convergence.csv", {"p", "h", "final_error", "order"}, rows);
  return 0;
}

int cmd_laplace_verify(const Options& opt) {
  const std::string dir = opt.out.empty() ? "out" : opt.out;
  fs::create_directories(dir);
  const auto rows = run_laplace_verification();
  std::ofstream os(dir + "/laplace_verification.csv");
  write_verification_csv(rows, os);
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.pass) {
      ++failed;
      std::cerr << "FAIL " << r.check << " p=" << r.p << " h=" << r.h << " value=" << r.margin_or_order << '\n';
    }
  std::cout << rows.size() - failed << "/" << rows.size() << " checks passed\n";
  return failed == 0 ? 0 : kAcceptanceFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic wave solver with perfectly matched layers"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file");
    sub->add_option("--profile", opt.profile, "Preset the config overlays")
        ->check(CLI::IsMember({"small", "paper"}));
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_flag("--dump-matrices", opt.dump, "Write assembled operators as MatrixMarket");
    sub->add_option("--snapshot-times", opt.snapshot_times, "Comma-separated snapshot times");
  };
  auto* simulate = app.add_subcommand("simulate", "PML run with energy recording and snapshots");
  auto* pml_error = app.add_subcommand("pml-error", "PML error against an enlarged reference domain");
  auto* longtime = app.add_subcommand("longtime", "Long-time amplitude record");
  auto* convergence = app.add_subcommand("convergence", "PML error over lists of h and p");
  auto* verify = app.add_subcommand("laplace-verify", "Laplace-domain verification report");
  for (auto* sub : {simulate, pml_error, longtime, convergence, verify}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(opt);
    if (*pml_error) return cmd_pml_error(opt);
    if (*longtime) return cmd_longtime(opt);
    if (*convergence) return cmd_convergence(opt);
    return cmd_laplace_verify(opt);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
