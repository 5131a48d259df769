#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dkdv/banded.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/weight.hpp"

namespace dkdv {

enum class Scheme { ImexCnAb2, CnNewton, PicardDuhamel };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Solution at one time, stored on all N nodes (u_0 = u_{N-1} = 0).
struct State {
  double t = 0.0;
  std::vector<double> u;
};

struct SolverConfig {
  double dt = 1e-3;
  double final_time = 1.0;
  Scheme scheme = Scheme::ImexCnAb2;
  bool nonlinear = true;
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
  double picard_tol = 1e-10;
  int picard_max_iter = 60;
  double panel = 0.25;
  int max_panel_halvings = 4;
  std::size_t stride = 1;
  /// Tail monitor looks at [(1 - tail_fraction) L, L].
  double tail_fraction = 0.1;
  /// Warn once the tail mass exceeds this fraction of the initial mass.
  double tail_tolerance = 1e-6;

  void validate() const;
  /// Number of steps of size dt to reach final_time (must divide evenly).
  std::size_t steps() const;
};

/// Per-step integrals for one monitored weight phi:
///   half_mass = 1/2 ∫ phi u^2,  gradient = ∫ phi' u_x^2,
///   advected = ∫ phi' u^2,  dispersed = ∫ phi''' u^2,  cubic = ∫ phi' u^3,
///   damped = ∫ phi a u^2.
struct WeightSeries {
  WeightSpec weight;
  std::vector<double> half_mass;
  std::vector<double> gradient;
  std::vector<double> advected;
  std::vector<double> dispersed;
  std::vector<double> cubic;
  std::vector<double> damped;
};

/// Appends the WeightSeries integrals of one state (u and u_x on all nodes).
void append_weight_terms(WeightSeries& series, const Grid& grid,
                         std::span<const double> damping,
                         std::span<const double> u,
                         std::span<const double> ux);

/// Output of a time integration. States are kept every `stride` steps; the
/// scalar series below are kept at every lattice time t_k = k dt, k = 0..K.
struct Trajectory {
  Grid grid;
  std::vector<double> damping;  // a on all nodes
  double dt = 0.0;
  bool nonlinear = true;
  bool advection = true;
  bool dispersion = true;
  std::size_t stride = 1;

  std::vector<State> states;
  std::vector<double> step_times;
  std::vector<double> traces;               // u_x(0, t_k)
  std::vector<double> energy;               // 1/2 ∫ u^2
  std::vector<double> damping_dissipation;  // ∫ a u^2
  std::vector<double> gradient_sq;          // ∫ u_x^2
  std::vector<double> tail_mass;            // ∫_{tail} u^2
  std::vector<WeightSeries> weights;
  std::vector<std::string> warnings;

  std::size_t newton_iterations = 0;
  std::size_t picard_iterations = 0;
  double picard_panel = 0.0;

  explicit Trajectory(const Grid& g) : grid(g) {}

  const WeightSeries* find_weight(const std::string& label) const;
  /// Index of the lattice time closest to t; throws if t is off-lattice.
  std::size_t lattice_index(double t) const;
  double final_time() const { return step_times.empty() ? 0.0 : step_times.back(); }
};

/// Skew-symmetric split -(1/3)(u D1u + D1(u^2)) on interior unknowns.
std::vector<double> nonlinear_term(const OperatorSet& ops,
                                   std::span<const double> interior);
/// Same on a full node vector; boundary rows are zero.
std::vector<double> nonlinear_term_nodes(const OperatorSet& ops,
                                         std::span<const double> nodes);
/// -u D1u in non-split form, for comparison.
std::vector<double> nonlinear_term_advective(const OperatorSet& ops,
                                             std::span<const double> interior);
/// Jacobian of nonlinear_term at u (tridiagonal).
BandedMatrix nonlinear_jacobian(const OperatorSet& ops,
                                std::span<const double> interior);

/// The Crank–Nicolson map (I - dt/2 A)^{-1} (I + dt/2 A) for the linear
/// generator A, with the implicit matrix factorised once.
class CrankNicolsonMap {
 public:
  CrankNicolsonMap(const OperatorSet& ops, double dt);

  std::vector<double> apply(std::span<const double> interior) const;
  /// (I - dt/2 A)^{-1} v.
  std::vector<double> solve(std::span<const double> v) const;
  /// (I + dt/2 A) v.
  std::vector<double> explicit_part(std::span<const double> v) const;
  double dt() const noexcept { return dt_; }

 private:
  double dt_;
  BandedMatrix forward_;
  BandedLU backward_;
};

/// Crank–Nicolson on the linear part, Adams–Bashforth 2 on the nonlinear one.
/// The first step uses a predictor-corrector to build the AB2 history.
class ImexStepper {
 public:
  ImexStepper(const OperatorSet& ops, const SolverConfig& cfg);

  State step(const State& state);
  /// Nonlinear term of the last accepted state, carried into the next step.
  const std::optional<std::vector<double>>& previous_nonlinear() const {
    return prev_;
  }
  void set_previous_nonlinear(std::vector<double> prev) { prev_ = std::move(prev); }

 private:
  const OperatorSet& ops_;
  bool nonlinear_;
  CrankNicolsonMap map_;
  std::optional<std::vector<double>> prev_;
};

/// Fully implicit Crank–Nicolson including the nonlinear term, solved by
/// Newton's method with a banded Jacobian. The nonlinear term is taken at the
/// midpoint (u^n + u^{n+1}) / 2, so the step conserves the cubic part of the
/// energy exactly.
class CnNewtonStepper {
 public:
  CnNewtonStepper(const OperatorSet& ops, const SolverConfig& cfg);

  State step(const State& state);
  int last_iterations() const noexcept { return last_iterations_; }

 private:
  const OperatorSet& ops_;
  SolverConfig cfg_;
  CrankNicolsonMap map_;
  BandedMatrix implicit_;  // I - dt/2 A
  int last_iterations_ = 0;
};

/// Full time integration with the scheme named in cfg.
Trajectory solve(const State& u0, const OperatorSet& ops,
                 const SolverConfig& cfg,
                 const std::vector<WeightSpec>& monitored = {});

/// Discrete linear propagator W(t) u0 built from Crank–Nicolson steps of size
/// dt; t must be a multiple of dt.
State linear_propagator(const State& u0, const OperatorSet& ops, double t,
                        double dt);

/// Duhamel/Picard iteration on time panels:
///   u(t_j) = W(t_j) u_p + ∫ W(t_j - s) N(u(s)) ds
/// with the integral taken by the trapezoid rule on the step lattice.
Trajectory solve_picard(const State& u0, const OperatorSet& ops,
                        const SolverConfig& cfg,
                        const std::vector<WeightSpec>& monitored = {});

/// Discrete L2 norm of a full node vector (trapezoid).
double l2_norm(const Grid& grid, std::span<const double> nodes);

}  // namespace dkdv
