#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dkdv/grid.hpp"
#include "dkdv/solver.hpp"
#include "dkdv/weight.hpp"

namespace dkdv {

// ---------------------------------------------------------------- norms

/// ∫ phi u^2 by the trapezoid rule.
double weighted_norm_sq(const Grid& grid, const State& u, const WeightSpec& w);

/// ‖u‖^2 under the family weight plus ‖u_x‖^2 under the derivative weight:
/// (x+1)^{m-1} for the polynomial family (unit when m = 0), e^{2bx} for the
/// exponential family.
double weighted_h1_norm_sq(const Grid& grid, const State& u,
                           WeightFamily family, double param);

/// Sum over i = 0..s of ∫ e^{2bx} |D^i u|^2, derivatives by repeated
/// node_derivative.
double exponential_hs_norm_sq(const Grid& grid, const State& u, double b,
                              int s);

// ------------------------------------------------------------ Lyapunov

/// d_j = 10 for j < m.
std::vector<double> default_lyapunov_coefficients(int m);

/// V_m(u) = 1/2 ∫ (x+1)^m u^2 + d_{m-1} V_{m-1}(u), V_0 = 1/2 ∫ u^2.
double lyapunov(const Grid& grid, const State& u, int m,
                const std::vector<double>& d);

struct LyapunovSeries {
  int m = 0;
  std::vector<double> d;
  std::vector<double> times;
  std::vector<double> values;
};

/// V_m at the stored states of a trajectory.
LyapunovSeries lyapunov_series(const Trajectory& traj, int m,
                               const std::vector<double>& d);

struct LyapunovCheck {
  LyapunovSeries series;  // sampled at k * period
  bool nonincreasing = false;
  int doublings = 0;
  std::string flag;  // empty, or the advice printed when all retries fail
};

/// Checks that V_m(u(k T0)) is nonincreasing in k, doubling d_{m-1} up to
/// max_doublings times when it is not.
LyapunovCheck lyapunov_decrease(const Trajectory& traj, int m,
                                std::vector<double> d, double period,
                                int max_doublings = 3);

// ------------------------------------------------------ energy identity

enum class TimeWeight { None, Remaining, Elapsed };

std::string to_string(TimeWeight tw);
/// "none", "T-t", "t".
TimeWeight time_weight_from_string(const std::string& name);

struct IdentityResidual {
  std::string weight;
  WeightFamily family = WeightFamily::Unit;
  double param = 0.0;
  TimeWeight time_weight = TimeWeight::None;
  double t1 = 0.0;
  double t2 = 0.0;
  double residual = 0.0;
  double scale = 0.0;
  double relative = 0.0;
  std::vector<std::pair<std::string, double>> terms;
};

/// Discrete residual of the weighted energy identity
///
///   [psi 1/2 ∫phi u^2]_{t1}^{t2} - ∫ psi' 1/2 ∫phi u^2 dt
///     + ∫ psi { 3/2 ∫phi' u_x^2 - 1/2 ∫(phi' + phi''') u^2 - 1/3 ∫phi' u^3
///               + ∫phi a u^2 + 1/2 phi(0) u_x(0)^2 } dt = 0
///
/// with psi = 1, T - t (T = t2) or t. Time integrals use the trapezoid rule
/// on the step lattice. The per-step series come from the trajectory when the
/// weight was monitored during the solve, otherwise from stored states, which
/// requires stride 1.
IdentityResidual identity_residual(const Trajectory& traj, const WeightSpec& w,
                                   TimeWeight time_weight, double t1,
                                   double t2);

// ---------------------------------------------------------- decay fits

struct DecayFit {
  std::string norm;
  double t_a = 0.0;
  double t_b = 0.0;
  double rate = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  bool floor_reached = false;
  bool constant_series = false;
  std::size_t samples = 0;
};

/// Least-squares line through (t, log value) on [t_a, t_b]. Samples below
/// 1e-12 of the first value are dropped and flagged.
DecayFit fit_decay(const std::vector<double>& times,
                   const std::vector<double>& values, double t_a, double t_b,
                   const std::string& norm = "");

/// The [0.2 T, 0.9 T] window.
DecayFit fit_decay(const std::vector<double>& times,
                   const std::vector<double>& values,
                   const std::string& norm = "");

/// ‖u(t_k)‖ at every lattice time (from the energy series).
std::vector<double> l2_norm_series(const Trajectory& traj);
/// ‖u(t_k)‖ in L^2_phi at every lattice time; needs the weight monitored.
std::vector<double> weighted_norm_series(const Trajectory& traj,
                                         const std::string& label);

// ------------------------------------------------------------ smoothing

enum class SmoothingNorm { H1, H1Weighted, HsExponential };

struct SmoothingSpec {
  SmoothingNorm norm = SmoothingNorm::H1;
  int m = 0;        // H1Weighted
  double b = 0.0;   // HsExponential
  int s = 1;        // HsExponential
};

/// sup over t >= t_min of t^{s/2} e^{mu t} ‖u(t)‖ / ‖u0‖_0, where
///   H1:            ‖u_x‖_{L^2}            over ‖u0‖_{L^2_{(x+1)}}, s = 1
///   H1Weighted:    ‖u‖_{H^1_{(x+1)^m}}    over ‖u0‖_{L^2_{(x+1)^m}}, s = 1
///   HsExponential: ‖u‖_{H^s_b}            over ‖u0‖_{L^2_b}
/// H1 uses every lattice time; the others use stored states.
double smoothing_statistic(const Trajectory& traj, const SmoothingSpec& spec,
                           double mu, double t_min);

// ---------------------------------------------------------- inequalities

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = true;     // lhs <= slack * rhs
};

struct InequalityReport {
  std::vector<InequalityCheck> checks;
  /// (eps, (∫|u|^3 - eps ‖u_x‖^2) / ‖u‖^{10/3}), the smallest c_eps this
  /// state needs.
  std::vector<std::pair<double, double>> c_eps;
  bool all_pass = true;
};

inline constexpr double kInequalitySlack = 1.05;

/// Young constant 3/4 (√2)^{4/3} (4 eps)^{-1/3} for
/// √2 ‖u_x‖^{1/2} ‖u‖^{5/2} <= eps ‖u_x‖^2 + c_eps ‖u‖^{10/3}.
double young_constant(double eps);

/// Moser, the weighted sup bound with constant 2 + 2b, the weighted
/// Poincaré bound with constant 1/b^2, the weighted cubic bound with
/// constant 2√2/3, and the cubic chain with the Young split for
/// eps in {0.5, 1}.
InequalityReport check_inequalities(const Grid& grid, const State& u,
                                    double b = 0.25);

/// Seeded smooth states vanishing at both ends: sums of one to four Gaussian
/// bumps times tanh(x / l).
std::vector<State> random_smooth_states(const Grid& grid, std::size_t count,
                                        std::uint64_t seed);

// --------------------------------------------------------- other checks

/// ∫∫ u^2 / (1/2 ∫ u_x(0)^2 dt + ∫∫ a u^2) over [t1, t2].
double observability_ratio(const Trajectory& traj, double t1, double t2);

/// For k = 1..k_max, ∫_eps^L (x+1)^{m-k} |D^k u|^2 over nodes x >= eps.
std::vector<double> higher_derivative_norms(const Grid& grid, const State& u,
                                            double eps, int k_max, int m);

}  // namespace dkdv
