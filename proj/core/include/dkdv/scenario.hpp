#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkdv/damping.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/solver.hpp"

namespace dkdv {

/// Initial datum u0. Tags:
///   gaussian  A exp(-((x - c) / w)^2)
///   sech2     A sech^2((x - c) / w)
///   hat       A max(0, 1 - |x - c| / w)
///   bump      A exp(1 - 1 / (1 - z^2)) for |z| < 1, z = (x - c) / w
///   zero      0
///   samples   values given on every grid node
struct InitialDatum {
  std::string tag = "gaussian";
  double amplitude = 1.0;
  double center = 5.0;
  double width = 1.0;
  std::vector<double> samples;
};

struct SampledDatum {
  State state;
  /// max(|u0(0)|, |u0(L)|) before the end nodes were set to zero.
  double clamp_perturbation = 0.0;
  /// Set when clamp_perturbation exceeds 1e-8 |amplitude|.
  std::string warning;
};

SampledDatum sample_initial(const Grid& grid, const InitialDatum& datum);

/// Damping kinds: "step", "smooth" (C^1 ramp), "constant" (a = a0 for x > 0),
/// "none".
struct DampingSpec {
  std::string kind = "step";
  double a0 = 1.5;
  double x0 = 10.0;
  double ramp_width = 0.0;
};

DampingProfile make_damping(const Grid& grid, const DampingSpec& spec);

/// Everything that determines a solution except the resolution.
struct Scenario {
  double length = 50.0;
  DampingSpec damping;
  InitialDatum datum;
  OperatorOptions options;
  bool nonlinear = true;
  double final_time = 1.0;
};

/// Canonical text rendering of every field, used for hashing.
std::string canonical_string(const Scenario& s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

std::uint64_t scenario_hash(const Scenario& s);

}  // namespace dkdv
