#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dkdv/error.hpp"
#include "dkdv/experiments/config.hpp"
#include "dkdv/experiments/runner.hpp"

namespace fs = std::filesystem;
using namespace dkdv;
using namespace dkdv::experiments;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> levels;
  std::size_t workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides $DKDV_OUT_DIR)");
  cmd->add_option("--seed", c.seed, "seed of the random inequality corpus");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.diagnostics.seed = *c.seed;
  if (c.levels) {
    cfg.diagnostics.levels = *c.levels;
    validate(cfg);
  }
  return cfg;
}

std::optional<std::string> out_flag(const Common& c) {
  return c.out.empty() ? std::nullopt : std::optional<std::string>(c.out);
}

void print_warnings(const Json& warnings) {
  for (const auto& w : warnings) std::cout << "  warning: " << w.get<std::string>() << '\n';
}

void report(const Json& pass) {
  for (auto it = pass.begin(); it != pass.end(); ++it) {
    if (it->is_null()) continue;
    std::cout << "  " << it.key() << ": " << (it->get<bool>() ? "pass" : "FAIL") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped KdV experiments"};
  app.require_subcommand(1);

  Common run_opts, verify_opts, sweep_opts, spectrum_opts;
  auto* run = app.add_subcommand("run", "solve one configuration and write its series and summary");
  add_common(run, run_opts);

  auto* verify =
      app.add_subcommand("verify", "identity residuals, inequality corpus and abscissa bound");
  add_common(verify, verify_opts);
  verify->add_option("--levels", verify_opts.levels, "refinement levels (>= 3)");

  auto* sweep = app.add_subcommand("sweep", "run the cross product of sweep.parameters");
  add_common(sweep, sweep_opts);
  sweep->add_option("--workers", sweep_opts.workers, "concurrent runs")->check(CLI::PositiveNumber);

  auto* spectrum = app.add_subcommand("spectrum", "numerical abscissa of the conjugated generator");
  add_common(spectrum, spectrum_opts);

  std::string csv_path, fit_out;
  std::vector<double> window;
  auto* fit = app.add_subcommand("fit", "refit the decay rates of an existing series CSV");
  fit->add_option("--csv", csv_path, "series.csv written by run")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--window", window, "fit window t_a t_b")->expected(2);
  fit->add_option("--out", fit_out, "output directory (default: next to the CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig cfg = load(run_opts);
      const fs::path dir = resolve_output_dir(cfg, out_flag(run_opts));
      const Json s = run_experiment(cfg, dir);
      std::cout << cfg.name << ": wrote " << dir.string() << '\n';
      print_warnings(s["warnings"]);
      report(s["pass"]);
    } else if (*verify) {
      const ExperimentConfig cfg = load(verify_opts);
      const fs::path dir = resolve_output_dir(cfg, out_flag(verify_opts));
      const Json v = verify_experiment(cfg, dir);
      std::cout << cfg.name << ": wrote " << (dir / "verify.json").string() << '\n';
      if (v["vacuous"].get<bool>()) std::cout << "  vacuous: every residual scale is zero\n";
      report(v["pass"]);
    } else if (*sweep) {
      const ExperimentConfig cfg = load(sweep_opts);
      const fs::path dir = resolve_output_dir(cfg, out_flag(sweep_opts));
      const Json s = sweep_experiment(cfg, dir, sweep_opts.workers);
      std::cout << cfg.name << ": " << s["runs"].get<std::size_t>() << " runs in " << dir.string()
                << '\n';
      print_warnings(s["warnings"]);
    } else if (*spectrum) {
      const ExperimentConfig cfg = load(spectrum_opts);
      const fs::path dir = resolve_output_dir(cfg, out_flag(spectrum_opts));
      const Json s = spectrum_experiment(cfg, dir);
      for (const auto& a : s["abscissa"]) {
        std::cout << "  b = " << a["b"].get<double>() << "  omega = " << a["omega"].get<double>()
                  << "  bound = " << a["bound"].get<double>() << "  "
                  << (a["pass"].get<bool>() ? "pass" : "FAIL") << '\n';
      }
    } else if (*fit) {
      std::optional<std::pair<double, double>> w;
      if (window.size() == 2) w = std::make_pair(window[0], window[1]);
      const Json j = fit_series(read_series_csv(csv_path), w);
      const fs::path dir = fit_out.empty() ? fs::path(csv_path).parent_path() : fs::path(fit_out);
      if (!dir.empty()) fs::create_directories(dir);
      write_json(dir / "fit.json", j);
      for (const auto& f : j["fits"]) {
        std::cout << "  " << f["norm"].get<std::string>() << ": " << f["status"].get<std::string>();
        if (f["status"] == "ok") {
          std::cout << "  rate = " << f["rate"].get<double>()
                    << "  R^2 = " << f["r_squared"].get<double>();
        }
        std::cout << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const dkdv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
