#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dkdv/error.hpp"
#include "dkdv/scenario.hpp"
#include "dkdv/solver.hpp"

namespace dkdv::experiments {

/// Syntax errors carry the line and column; validation errors the field path.
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(std::string field, const std::string& what)
      : ConfigError(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct WeightRequest {
  std::string family = "unit";  // unit | polynomial | exponential | linear
  double param = 0.0;
  bool operator==(const WeightRequest&) const = default;
};

struct LyapunovRequest {
  int m = 1;
  std::vector<double> d;  // empty: 10 for every entry
  bool operator==(const LyapunovRequest&) const = default;
};

struct SmoothingRequest {
  std::string norm = "h1";  // h1 | h1-weighted | hs-exponential
  int m = 0;
  double b = 0.0;
  int s = 1;
  double mu = 0.0;
  double t_min = 0.0;  // 0: one time step
  bool operator==(const SmoothingRequest&) const = default;
};

struct DiagnosticsConfig {
  std::vector<WeightRequest> weights;
  std::vector<std::string> time_weights{"none", "T-t"};
  bool residuals = true;
  double residual_tolerance = 1e-3;
  std::vector<LyapunovRequest> lyapunov;
  double lyapunov_period = 5.0;
  std::optional<std::pair<double, double>> fit_window;
  std::vector<SmoothingRequest> smoothing;
  bool inequalities = false;
  double inequality_b = 0.25;
  std::size_t corpus_size = 100;
  std::uint64_t seed = 20240601;
  std::vector<double> abscissa_b;
  bool leading_eigenvalue = false;
  std::size_t levels = 3;
  bool operator==(const DiagnosticsConfig&) const = default;
};

struct SweepConfig {
  /// Parameter name to values; the cross product is run.
  std::map<std::string, std::vector<double>> parameters;
  std::size_t max_runs = 64;
  bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::size_t points = 2001;
  Scenario scenario;
  Scheme scheme = Scheme::ImexCnAb2;
  double dt = 1e-3;
  std::size_t stride = 100;
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
  double picard_tol = 1e-10;
  int picard_max_iter = 60;
  double panel = 0.25;
  double tail_fraction = 0.1;
  double tail_tolerance = 1e-6;
  DiagnosticsConfig diagnostics;
  SweepConfig sweep;
  std::string output_dir;  // empty: out/<name>

  SolverConfig solver_config() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses a config document; `source` names it in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// Cross-field checks (x0 < L, m <= 4, weight rates, time lattice).
void validate(const ExperimentConfig& cfg);

/// Every field with defaults filled in.
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// Names accepted in sweep.parameters.
const std::vector<std::string>& sweep_parameter_names();

/// Copy of cfg with one sweep parameter applied.
ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& name,
                                double value);

}  // namespace dkdv::experiments
