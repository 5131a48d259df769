#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "dkdv/banded.hpp"
#include "dkdv/damping.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/solver.hpp"
#include "dkdv/spectral.hpp"

using namespace dkdv;

namespace {

OperatorSet step_operators(std::size_t n) {
  const Grid g = build_grid(50.0, n);
  return build_operators(g, build_damping(g, 1.5, 10.0, DampingShape::Step));
}

State gaussian(const Grid& g) {
  State s{0.0, std::vector<double>(g.size())};
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double x = g.x(i) - 5.0;
    s.u[i] = std::exp(-x * x);
  }
  return s;
}

}  // namespace

static void BM_BandedLUSolve(benchmark::State& state) {
  const OperatorSet ops = step_operators(static_cast<std::size_t>(state.range(0)));
  BandedMatrix m = BandedMatrix::identity(ops.size());
  BandedMatrix a = ops.generator;
  a *= -5e-4;
  m += a;
  const BandedLU lu(m);
  std::vector<double> rhs(ops.size(), 1.0);
  for (auto _ : state) {
    std::vector<double> x = lu.solve(rhs);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BandedLUSolve)->Arg(1001)->Arg(2001)->Arg(4001)->Arg(8001)->Complexity();

static void BM_ThirdDerivative(benchmark::State& state) {
  const OperatorSet ops = step_operators(static_cast<std::size_t>(state.range(0)));
  std::vector<double> u(ops.size()), y(ops.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(0.01 * static_cast<double>(i));
  for (auto _ : state) {
    ops.d3.multiply(u, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ThirdDerivative)->Arg(1001)->Arg(2001)->Arg(4001)->Arg(8001)->Complexity();

static void BM_ImexStep(benchmark::State& state) {
  const OperatorSet ops = step_operators(static_cast<std::size_t>(state.range(0)));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  ImexStepper stepper(ops, cfg);
  State s = stepper.step(gaussian(ops.grid));
  for (auto _ : state) {
    s = stepper.step(s);
    benchmark::DoNotOptimize(s.u.data());
  }
}
BENCHMARK(BM_ImexStep)->Arg(1001)->Arg(2001)->Arg(4001);

static void BM_CnNewtonStep(benchmark::State& state) {
  const OperatorSet ops = step_operators(static_cast<std::size_t>(state.range(0)));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.scheme = Scheme::CnNewton;
  CnNewtonStepper stepper(ops, cfg);
  State s = gaussian(ops.grid);
  for (auto _ : state) {
    s = stepper.step(s);
    benchmark::DoNotOptimize(s.u.data());
  }
}
BENCHMARK(BM_CnNewtonStep)->Arg(1001)->Arg(2001);

static void BM_NumericalAbscissa(benchmark::State& state) {
  const OperatorSet ops = step_operators(static_cast<std::size_t>(state.range(0)));
  const BandedMatrix b = build_conjugated_generator(ops, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerical_abscissa(b));
  }
}
BENCHMARK(BM_NumericalAbscissa)->Arg(1001)->Arg(2001)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
