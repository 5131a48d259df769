#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dkdv/damping.hpp"
#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/solver.hpp"
#include "dkdv/weight.hpp"

using namespace dkdv;

namespace {

State gaussian(const Grid& g, double amp, double centre = 5.0, double width = 1.0) {
  State s;
  s.u.resize(g.size());
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double z = (g.x(i) - centre) / width;
    s.u[i] = amp * std::exp(-z * z);
  }
  return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(Nonlinear, EnergyNeutral) {
  const Grid g = build_grid(20.0, 201);
  const OperatorSet ops = build_operators(g, constant_damping(g, 1.0));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> u(ops.size());
    for (double& x : u) x = dist(rng);
    const auto n = nonlinear_term(ops, u);
    EXPECT_NEAR(dot(n, u), 0.0, 1e-10 * dot(u, u));
  }
}

TEST(Nonlinear, JacobianMatchesFiniteDifference) {
  const Grid g = build_grid(10.0, 61);
  const OperatorSet ops = build_operators(g, constant_damping(g, 1.0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> dist;
  std::vector<double> u(ops.size()), v(ops.size());
  for (double& x : u) x = dist(rng);
  for (double& x : v) x = dist(rng);
  const double eps = 1e-6;
  std::vector<double> up(u), um(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    up[i] += eps * v[i];
    um[i] -= eps * v[i];
  }
  const auto np = nonlinear_term(ops, up);
  const auto nm = nonlinear_term(ops, um);
  const auto jv = nonlinear_jacobian(ops, u) * std::span<const double>(v);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_NEAR((np[i] - nm[i]) / (2 * eps), jv[i], 1e-5 * (1.0 + std::abs(jv[i])));
  }
}

TEST(Solver, ZeroStaysZero) {
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.final_time = 1.0;
  for (Scheme s : {Scheme::ImexCnAb2, Scheme::CnNewton, Scheme::PicardDuhamel}) {
    cfg.scheme = s;
    const Trajectory tr = solve(State{0.0, std::vector<double>(g.size(), 0.0)}, ops, cfg);
    for (double v : tr.states.back().u) EXPECT_EQ(v, 0.0);
    for (double v : tr.traces) EXPECT_EQ(v, 0.0);
  }
}

TEST(Solver, NormNonIncreasing) {
  // ||u^{k+1}|| <= ||u^k|| (1 + 1e-8); AB2 leaks O(dt^3) per step, so the
  // IMEX run uses dt = 1e-3
  const Grid g = build_grid(50.0, 1001);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.final_time = 2.0;
  for (Scheme s : {Scheme::ImexCnAb2, Scheme::CnNewton}) {
    cfg.scheme = s;
    cfg.dt = s == Scheme::ImexCnAb2 ? 1e-3 : 4e-3;
    const Trajectory tr = solve(gaussian(g, 1.0), ops, cfg);
    ASSERT_EQ(tr.energy.size(), cfg.steps() + 1);
    for (std::size_t k = 1; k < tr.energy.size(); ++k) {
      EXPECT_LE(std::sqrt(tr.energy[k] / tr.energy[k - 1]), 1.0 + 1e-8)
          << to_string(s) << " k=" << k;
    }
  }
}

TEST(Solver, CnNewtonConservesCubicPart) {
  // midpoint nonlinearity: energy change per step equals the linear CN
  // dissipation, so the energy never grows beyond rounding
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.dt = 0.02;
  cfg.final_time = 2.0;
  cfg.scheme = Scheme::CnNewton;
  const Trajectory tr = solve(gaussian(g, 2.0), ops, cfg);
  for (std::size_t k = 1; k < tr.energy.size(); ++k) {
    EXPECT_LE(tr.energy[k], tr.energy[k - 1] * (1.0 + 1e-13));
  }
}

TEST(Solver, LinearNormNonIncreasingPerStep) {
  const Grid g = build_grid(50.0, 1001);
  const OperatorSet ops = build_operators(g, constant_damping(g, 0.5));
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.final_time = 5.0;
  cfg.nonlinear = false;
  const Trajectory tr = solve(gaussian(g, 1.0), ops, cfg);
  for (std::size_t k = 1; k < tr.energy.size(); ++k) {
    EXPECT_LE(std::sqrt(tr.energy[k] / tr.energy[k - 1]) - 1.0, 1e-10 * 1.0);
  }
}

TEST(Solver, GaugeEquivalenceForConstantDamping) {
  // u_damped(T) = e^{-a0 T} u_undamped(T) for a = a0 everywhere
  const Grid g = build_grid(50.0, 1001);
  const double a0 = 1.0;
  const OperatorSet damped = build_operators(g, constant_damping(g, a0));
  const OperatorSet free = build_operators(
      g, custom_damping(g, [](double) { return 0.0; }, 0.0, 1.0));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.final_time = 1.0;
  cfg.nonlinear = false;
  const State u0 = gaussian(g, 1.0);
  const auto ud = solve(u0, damped, cfg).states.back().u;
  auto uf = solve(u0, free, cfg).states.back().u;
  for (double& v : uf) v *= std::exp(-a0);
  std::vector<double> diff(ud.size());
  for (std::size_t i = 0; i < ud.size(); ++i) diff[i] = ud[i] - uf[i];
  EXPECT_LE(l2_norm(g, diff), 1e-6 * l2_norm(g, ud));
}

TEST(Solver, SchemesAgree) {
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.dt = 2.5e-3;
  cfg.final_time = 1.0;
  const State u0 = gaussian(g, 1.0);
  cfg.scheme = Scheme::ImexCnAb2;
  const auto a = solve(u0, ops, cfg).states.back().u;
  cfg.scheme = Scheme::CnNewton;
  const auto b = solve(u0, ops, cfg).states.back().u;
  cfg.scheme = Scheme::PicardDuhamel;
  const auto c = solve(u0, ops, cfg).states.back().u;
  EXPECT_LT(max_diff(a, b), 1e-4);
  EXPECT_LT(max_diff(b, c), 1e-4);
}

TEST(Solver, PicardLinearMatchesPropagator) {
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.final_time = 1.0;
  cfg.nonlinear = false;
  cfg.scheme = Scheme::PicardDuhamel;
  const State u0 = gaussian(g, 1.0);
  const Trajectory tr = solve(u0, ops, cfg);
  const State w = linear_propagator(u0, ops, 1.0, 0.01);
  EXPECT_LT(max_diff(tr.states.back().u, w.u), 1e-13);
  EXPECT_EQ(tr.picard_iterations, 4u);  // one evaluation per panel
}

TEST(Solver, TimeOrderTwo) {
  const Grid g = build_grid(30.0, 301);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  const State u0 = gaussian(g, 1.0);
  SolverConfig cfg;
  cfg.final_time = 1.0;
  cfg.scheme = Scheme::CnNewton;
  cfg.dt = 1.25e-3;
  const auto ref = solve(u0, ops, cfg).states.back().u;
  for (Scheme s : {Scheme::ImexCnAb2, Scheme::CnNewton}) {
    cfg.scheme = s;
    cfg.dt = 0.02;
    const double e1 = max_diff(solve(u0, ops, cfg).states.back().u, ref);
    cfg.dt = 0.01;
    const double e2 = max_diff(solve(u0, ops, cfg).states.back().u, ref);
    EXPECT_GE(std::log2(e1 / e2), 1.7) << to_string(s);
  }
}

TEST(Solver, SeriesLengthsAndStride) {
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops = build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.final_time = 1.0;
  cfg.stride = 10;
  const Trajectory tr = solve(gaussian(g, 1.0), ops, cfg, {polynomial_weight(g, 1)});
  EXPECT_EQ(tr.traces.size(), 101u);
  EXPECT_EQ(tr.states.size(), 11u);
  ASSERT_EQ(tr.weights.size(), 1u);
  EXPECT_EQ(tr.weights[0].half_mass.size(), 101u);
  EXPECT_NE(tr.find_weight("poly1"), nullptr);
  EXPECT_EQ(tr.lattice_index(0.5), 50u);
  EXPECT_THROW(tr.lattice_index(0.505), ConfigError);
}

TEST(Solver, InvalidConfig) {
  const Grid g = build_grid(50.0, 101);
  const OperatorSet ops = build_operators(g, constant_damping(g, 1.0));
  SolverConfig cfg;
  cfg.dt = 0.3;
  cfg.final_time = 1.0;
  EXPECT_THROW(solve(gaussian(g, 1.0), ops, cfg), ConfigError);
  cfg.dt = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  State bad = gaussian(g, 1.0);
  bad.u[0] = 1.0;
  cfg.dt = 0.1;
  EXPECT_THROW(solve(bad, ops, cfg), ConfigError);
  EXPECT_THROW(scheme_from_string("rk4"), ConfigError);
}

TEST(Solver, TailWarningOnTruncationArtefact) {
  // datum placed against the right end reaches the tail immediately
  const Grid g = build_grid(20.0, 401);
  const OperatorSet ops = build_operators(g, build_damping(g, 0.1, 5.0, DampingShape::Step));
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.final_time = 0.5;
  const Trajectory tr = solve(gaussian(g, 1.0, 18.0), ops, cfg);
  EXPECT_FALSE(tr.warnings.empty());
  const Trajectory quiet = solve(gaussian(g, 1.0, 5.0), ops, cfg);
  EXPECT_TRUE(quiet.warnings.empty());
}
