#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dkdv/scenario.hpp"
#include "dkdv/solver.hpp"

namespace dkdv {

struct Resolution {
  std::size_t points = 0;
  double dt = 0.0;
};

/// Solution of a scenario at its final time with the given scheme and
/// resolution (only the final state is kept).
State solve_scenario(const Scenario& s, Resolution r,
                     Scheme scheme = Scheme::CnNewton);

struct ReferenceOptions {
  Resolution resolution{8001, 2e-4};
  /// Empty disables the cache.
  std::filesystem::path cache_dir;
};

struct ReferenceResult {
  State state;
  bool from_cache = false;
  std::filesystem::path cache_file;
};

/// Crank–Nicolson–Newton solution on the reference resolution (at least 8001
/// points, dt at most 2e-4). Results are cached as
///
///   u64 scenario hash, u64 N, f64 L, f64 dt, f64 T, then N f64 values
///
/// little-endian, written to a temporary file and renamed into place.
ReferenceResult reference_solve(const Scenario& s, const ReferenceOptions& opts = {});

/// Cache file name for a scenario at a resolution.
std::filesystem::path reference_cache_path(const std::filesystem::path& dir,
                                           const Scenario& s, Resolution r);

struct ReferenceFile {
  std::uint64_t hash = 0;
  std::uint64_t points = 0;
  double length = 0.0;
  double dt = 0.0;
  double final_time = 0.0;
  std::vector<double> values;
};

void write_reference_file(const std::filesystem::path& path, const ReferenceFile& f);
/// Throws ConfigError on a short or unreadable file.
ReferenceFile read_reference_file(const std::filesystem::path& path);

struct ConvergenceStudy {
  std::vector<Resolution> levels;
  /// Sup-norm error of each level but the last against the last, on the
  /// coarse level's nodes.
  std::vector<double> errors;
  /// Least-squares slope of log error against log dt.
  double order = 0.0;
  /// Set when errors are not positive and strictly decreasing.
  bool invalid = false;
  std::string note;
};

/// Errors of explicit levels against the last one. Each level's grid must be
/// nested in the last one's.
ConvergenceStudy convergence_study(const Scenario& s,
                                   const std::vector<Resolution>& levels,
                                   Scheme scheme = Scheme::CnNewton);

/// `levels` runs starting at `coarsest`, halving dx and dt each time.
ConvergenceStudy convergence_order(const Scenario& s, std::size_t levels,
                                   Resolution coarsest,
                                   Scheme scheme = Scheme::CnNewton);

/// Least-squares slope of log e against log h.
double fit_order(const std::vector<double>& h, const std::vector<double>& e);

/// Generator switches for the pure decay limit u_t = -a u.
OperatorOptions ode_limit_options();

}  // namespace dkdv
