#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dkdv/error.hpp"
#include "dkdv/experiments/config.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/scenario.hpp"
#include "dkdv/solver.hpp"
#include "dkdv/weight.hpp"

namespace dkdv::experiments {

using Json = nlohmann::ordered_json;

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutDirVariable = "DKDV_OUT_DIR";

/// --out, then $DKDV_OUT_DIR, then output.dir, then out/<name>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                         const std::optional<std::string>& flag);

/// A solved configuration.
struct Simulation {
  Grid grid;
  OperatorSet ops;
  SampledDatum datum;
  std::vector<WeightSpec> weights;
  Trajectory trajectory;
};

Simulation simulate(const ExperimentConfig& cfg);

/// Summary document of a solved configuration (fits, residuals, Lyapunov
/// checks, smoothing statistics, inequality margins, abscissa results).
Json summarize(const ExperimentConfig& cfg, const Simulation& sim);

/// Writes series.csv: t, l2, norm_<weight>..., V<m>..., trace, tail_mass at
/// every stored state, 17 significant digits.
void write_series_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                      const Simulation& sim);

/// Solve, diagnose, and write series.csv, summary.json and
/// effective_config.json into out_dir. Returns the summary.
Json run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Identity residuals over the built-in refinement (levels halvings of dx
/// and dt), the inequality corpus and the abscissa bound on the finest grid.
/// A residual passes when its finest value is within tolerance or when the
/// levels converge at order >= 1.8 (status resolution-limited).
/// Writes verify.json and effective_config.json.
Json verify_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

class SweepCapExceeded : public ConfigError {
 public:
  SweepCapExceeded(std::size_t runs, std::size_t cap);
  std::size_t runs() const noexcept { return runs_; }

 private:
  std::size_t runs_;
};

/// Cross product of sweep.parameters, one run per combination in
/// run_<index>/, up to `workers` at a time. Writes sweep.json and sweep.csv.
Json sweep_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      std::size_t workers = 1);

/// Numerical abscissa of the conjugated generator for every requested b
/// (0.1, 0.25, 0.5 by default). Writes spectrum.json.
Json spectrum_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};

SeriesTable read_series_csv(const std::filesystem::path& path);

/// Refits every column of a series CSV except t, trace and tail_mass.
Json fit_series(const SeriesTable& table,
                const std::optional<std::pair<double, double>>& window);

/// 17 significant digits.
std::string format_double(double v);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace dkdv::experiments
