#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dkdv/damping.hpp"
#include "dkdv/diagnostics.hpp"
#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/solver.hpp"
#include "dkdv/spectral.hpp"
#include "dkdv/weight.hpp"

using namespace dkdv;

namespace {

DampingProfile zero_damping(const Grid& g) {
  return custom_damping(g, [](double) { return 0.0; }, 0.0, 1.0);
}

double quotient(const BandedMatrix& m, const std::vector<double>& x) {
  const std::vector<double> mx = m * std::span<const double>(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += x[i] * mx[i];
    den += x[i] * x[i];
  }
  return num / den;
}

// Max error of B sin(pi x / L) against the differential expression, over the
// middle half of the domain.
double sine_error(std::size_t points, double b) {
  const double L = 10.0;
  const Grid g = build_grid(L, points);
  const OperatorSet ops = build_operators(g, constant_damping(g, 0.7));
  const BandedMatrix B = build_conjugated_generator(ops, b);
  const double k = std::numbers::pi / L;
  std::vector<double> u(ops.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(k * g.x(i + 1));
  const std::vector<double> bu = B * std::span<const double>(u);
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = g.x(i + 1);
    if (x < 0.25 * L || x > 0.75 * L) continue;
    const double s = std::sin(k * x), c = std::cos(k * x);
    const double d1 = k * c, d2 = -k * k * s, d3 = -k * k * k * c;
    const double exact = -(d1 - b * s) - (d3 - 3 * b * d2 + 3 * b * b * d1 - b * b * b * s) -
                         0.7 * s;
    err = std::max(err, std::abs(bu[i] - exact));
  }
  return err;
}

}  // namespace

TEST(Abscissa, DiagonalMatrix) {
  std::vector<double> d{-1.0, -2.0, -3.0};
  EXPECT_NEAR(numerical_abscissa(BandedMatrix::diagonal(d)), -1.0, 1e-10);
}

TEST(Abscissa, SkewMatrixIsZero) {
  BandedMatrix m(6, 1, 1);
  for (std::size_t i = 0; i + 1 < 6; ++i) {
    m.at(i, i + 1) = 1.0 + i;
    m.at(i + 1, i) = -1.0 - i;
  }
  EXPECT_NEAR(numerical_abscissa(m), 0.0, 1e-10);
}

TEST(Abscissa, KnownSymmetricSpectrum) {
  // Tridiagonal (1, -2, 1) of size n has eigenvalues -4 sin^2(k pi / 2(n+1)).
  const std::size_t n = 40;
  BandedMatrix m(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    m.at(i, i) = -2.0;
    if (i > 0) m.at(i, i - 1) = 1.0;
    if (i + 1 < n) m.at(i, i + 1) = 1.0;
  }
  const double top = -4.0 * std::pow(std::sin(std::numbers::pi / (2.0 * (n + 1))), 2);
  EXPECT_NEAR(numerical_abscissa(m), top, 1e-9);
}

TEST(Abscissa, NonConvergenceCarriesEstimate) {
  const Grid g = build_grid(50.0, 401);
  const OperatorSet ops = build_operators(g, zero_damping(g));
  const BandedMatrix B = build_conjugated_generator(ops, 0.25);
  try {
    numerical_abscissa(B, 1e-300, 1);
    FAIL() << "expected IterationError";
  } catch (const IterationError& e) {
    EXPECT_TRUE(std::isfinite(e.last_estimate()));
  }
}

TEST(Conjugated, SmallBMatchesGenerator) {
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops =
      build_operators(g, build_damping(g, 1.5, 10.0, DampingShape::Step));
  const BandedMatrix B = build_conjugated_generator(ops, 1e-12);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = (i >= 2 ? i - 2 : 0); j <= std::min(ops.size() - 1, i + 2); ++j) {
      EXPECT_NEAR(B(i, j), ops.generator(i, j), 1e-8);
    }
  }
}

TEST(Conjugated, RejectsNonPositiveB) {
  const Grid g = build_grid(10.0, 101);
  const OperatorSet ops = build_operators(g, zero_damping(g));
  EXPECT_THROW(build_conjugated_generator(ops, 0.0), ConfigError);
  EXPECT_THROW(build_conjugated_generator(ops, -0.5), ConfigError);
}

TEST(Conjugated, SineSecondOrder) {
  const double e1 = sine_error(401, 0.5);
  const double e2 = sine_error(801, 0.5);
  const double e3 = sine_error(1601, 0.5);
  EXPECT_LT(e1, 1e-2);
  EXPECT_GT(std::log2(e1 / e2), 1.8);
  EXPECT_GT(std::log2(e2 / e3), 1.8);
}

TEST(Conjugated, RayleighQuotientBoundAtBOne) {
  const Grid g = build_grid(50.0, 1001);
  const OperatorSet ops = build_operators(g, zero_damping(g));
  const BandedMatrix B = build_conjugated_generator(ops, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(ops.size());
    for (double& x : v) x = dist(rng);
    EXPECT_LE(quotient(B, v), 2.0 + 1e-10);
  }
  EXPECT_LE(numerical_abscissa(B), 2.0 + 10.0 * g.dx() * g.dx());
}

TEST(Conjugated, AbscissaBoundUndamped) {
  for (std::size_t n : {501u, 1001u, 2001u}) {
    const Grid g = build_grid(50.0, n);
    const OperatorSet ops = build_operators(g, zero_damping(g));
    EXPECT_LE(numerical_abscissa(build_conjugated_generator(ops, 0.5)),
              0.625 + 10.0 * g.dx() * g.dx());
  }
}

TEST(Conjugated, AbscissaBoundStepAndConstant) {
  const Grid g = build_grid(50.0, 2001);
  const double slack = 10.0 * g.dx() * g.dx();
  const OperatorSet step =
      build_operators(g, build_damping(g, 1.5, 10.0, DampingShape::Step));
  const OperatorSet flat = build_operators(g, constant_damping(g, 1.5));
  for (double b : {0.1, 0.25, 0.5}) {
    const double bound = b * b * b + b;
    EXPECT_LE(numerical_abscissa(build_conjugated_generator(step, b)), bound + slack);
    EXPECT_LE(numerical_abscissa(build_conjugated_generator(flat, b)),
              bound - 1.5 + slack);
  }
}

TEST(Conjugated, MonotoneInDamping) {
  const Grid g = build_grid(50.0, 801);
  const OperatorSet ops =
      build_operators(g, build_damping(g, 1.0, 10.0, DampingShape::Step));
  const BandedMatrix B = build_conjugated_generator(ops, 0.25);
  const double base = numerical_abscissa(B);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> da(ops.size());
    for (double& x : da) x = dist(rng);
    const BandedMatrix damped =
        BandedMatrix::combine(1.0, B, -1.0, BandedMatrix::diagonal(da));
    EXPECT_LE(numerical_abscissa(damped), base + 1e-9);
  }
}

TEST(Conjugated, AbscissaDominatesEigenvalues) {
  const Grid g = build_grid(30.0, 301);
  const OperatorSet ops =
      build_operators(g, build_damping(g, 1.5, 10.0, DampingShape::Step));
  for (double b : {0.1, 0.5}) {
    const GeneratorAnalysis a = analyze_generator(ops, b, true);
    ASSERT_TRUE(a.leading_eigenvalue.has_value());
    EXPECT_GE(a.abscissa, *a.leading_eigenvalue - 1e-9);
    EXPECT_DOUBLE_EQ(a.analytic_bound, b * b * b + b);
  }
}

TEST(Prediction, NoGuaranteeWithoutDamping) {
  const Grid g = build_grid(50.0, 501);
  const OperatorSet ops = build_operators(g, zero_damping(g));
  const GeneratorAnalysis a = analyze_generator(ops, 0.5);
  DecayFit fit;
  fit.rate = 0.3;
  EXPECT_EQ(predicted_vs_fitted(a, fit).flag, "no guarantee");
}

TEST(Prediction, ConstantDampingConsistent) {
  const Grid g = build_grid(50.0, 1001);
  const OperatorSet ops = build_operators(g, constant_damping(g, 1.5));
  const double b = 0.5;
  const GeneratorAnalysis a = analyze_generator(ops, b);
  EXPECT_LT(a.abscissa, 0.0);

  State u0;
  u0.u.resize(g.size());
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double z = g.x(i) - 5.0;
    u0.u[i] = std::exp(-z * z);
  }
  SolverConfig cfg;
  cfg.nonlinear = false;
  cfg.scheme = Scheme::CnNewton;
  cfg.dt = 1e-2;
  cfg.final_time = 10.0;
  const WeightSpec w = exponential_weight(g, b);
  const Trajectory tr = solve(u0, ops, cfg, {w});
  const DecayFit fit =
      fit_decay(tr.step_times, weighted_norm_series(tr, w.label), w.label);
  EXPECT_GT(fit.rate, 0.0);
  EXPECT_GE(fit.r_squared, 0.98);
  const PredictionReport p = predicted_vs_fitted(a, fit);
  EXPECT_EQ(p.flag, "consistent");
  EXPECT_GE(p.fitted_rate, 1.5 - b * b * b - b - 1e-3);

  DecayFit slow = fit;
  slow.rate = 0.5 * p.guaranteed_rate;
  EXPECT_EQ(predicted_vs_fitted(a, slow).flag, "inconsistent");
}
