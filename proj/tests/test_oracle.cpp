#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dkdv/error.hpp"
#include "dkdv/oracle.hpp"
#include "dkdv/scenario.hpp"

using namespace dkdv;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dkdv_oracle_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// Cleared once per process so stale entries from older builds are never read.
const std::filesystem::path& shared_cache() {
  static const std::filesystem::path dir = scratch_dir("shared");
  return dir;
}

double rel_sup(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

}  // namespace

TEST(Scenario, SampledDatumVanishesAtEnds) {
  const Grid g = build_grid(10.0, 101);
  InitialDatum d;
  d.tag = "hat";
  d.center = 0.5;
  d.width = 1.0;
  const SampledDatum s = sample_initial(g, d);
  EXPECT_EQ(s.state.u.front(), 0.0);
  EXPECT_EQ(s.state.u.back(), 0.0);
  EXPECT_NEAR(s.clamp_perturbation, 0.5, 1e-15);
  EXPECT_FALSE(s.warning.empty());

  d.tag = "gaussian";
  d.center = 5.0;
  EXPECT_TRUE(sample_initial(g, d).warning.empty());
  d.tag = "nope";
  EXPECT_THROW(sample_initial(g, d), ConfigError);
}

TEST(Scenario, HashSeesEveryField) {
  Scenario a;
  Scenario b = a;
  EXPECT_EQ(scenario_hash(a), scenario_hash(b));
  b.damping.x0 = std::nextafter(b.damping.x0, 100.0);
  EXPECT_NE(scenario_hash(a), scenario_hash(b));
  b = a;
  b.options.dispersion = false;
  EXPECT_NE(scenario_hash(a), scenario_hash(b));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Oracle, RejectsCoarseReference) {
  Scenario s;
  ReferenceOptions o;
  o.resolution = {4001, 2e-4};
  EXPECT_THROW(reference_solve(s, o), ConfigError);
  o.resolution = {8001, 4e-4};
  EXPECT_THROW(reference_solve(s, o), ConfigError);
}

TEST(Oracle, ZeroDatumGivesZero) {
  Scenario s;
  s.datum.tag = "zero";
  s.final_time = 0.2;
  const State u = reference_solve(s).state;
  for (double v : u.u) EXPECT_EQ(v, 0.0);
}

TEST(Oracle, GaugeTransformationConstantDamping) {
  Scenario damped;
  damped.nonlinear = false;
  damped.damping.kind = "constant";
  damped.damping.a0 = 1.0;
  Scenario free = damped;
  free.damping.kind = "none";
  const State u = reference_solve(damped).state;
  const State w = reference_solve(free).state;
  std::vector<double> scaled(w.u.size());
  for (std::size_t i = 0; i < w.u.size(); ++i) scaled[i] = std::exp(-1.0) * w.u[i];
  EXPECT_LT(rel_sup(u.u, scaled), 1e-6);
}

TEST(Oracle, CacheReloadsBitIdentically) {
  const auto dir = scratch_dir("cache");
  Scenario s;
  s.final_time = 0.1;
  ReferenceOptions o;
  o.cache_dir = dir;
  const ReferenceResult first = reference_solve(s, o);
  EXPECT_FALSE(first.from_cache);
  ASSERT_TRUE(std::filesystem::exists(first.cache_file));
  EXPECT_EQ(std::filesystem::file_size(first.cache_file), 40u + 8u * 8001u);
  const ReferenceResult second = reference_solve(s, o);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.state.u, first.state.u);

  const ReferenceFile f = read_reference_file(first.cache_file);
  EXPECT_EQ(f.hash, scenario_hash(s));
  EXPECT_EQ(f.points, 8001u);
  EXPECT_EQ(f.length, 50.0);
  EXPECT_EQ(f.dt, 2e-4);
  EXPECT_EQ(f.final_time, 0.1);

  // a truncated entry is recomputed
  std::filesystem::resize_file(first.cache_file, 100);
  const ReferenceResult third = reference_solve(s, o);
  EXPECT_FALSE(third.from_cache);
  EXPECT_EQ(third.state.u, first.state.u);
  std::filesystem::remove_all(dir);
}

TEST(Oracle, TruncatedFileRejected) {
  const auto dir = scratch_dir("trunc");
  std::filesystem::create_directories(dir);
  const auto path = dir / "short.ref";
  std::ofstream(path, std::ios::binary) << "abc";
  EXPECT_THROW(read_reference_file(path), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Oracle, SelfConsistentUnderHalvedStep) {
  Scenario s;
  ReferenceOptions base;
  base.cache_dir = shared_cache();
  const State a = reference_solve(s, base).state;
  ReferenceOptions o;
  o.resolution.dt = 1e-4;
  const State b = reference_solve(s, o).state;
  EXPECT_LT(rel_sup(a.u, b.u), 1e-5);
}

TEST(Oracle, SolversConvergeToReference) {
  Scenario s;
  ReferenceOptions o;
  o.cache_dir = shared_cache();
  const State ref = reference_solve(s, o).state;
  for (Scheme scheme : {Scheme::ImexCnAb2, Scheme::CnNewton}) {
    std::vector<double> h, e;
    for (Resolution r : {Resolution{501, 8e-3}, Resolution{1001, 4e-3}, Resolution{2001, 2e-3}}) {
      const State u = solve_scenario(s, r, scheme);
      const std::size_t stride = 8000 / (r.points - 1);
      double err = 0.0;
      for (std::size_t i = 0; i < u.u.size(); ++i) {
        err = std::max(err, std::abs(u.u[i] - ref.u[i * stride]));
      }
      h.push_back(r.dt);
      e.push_back(err);
    }
    EXPECT_LT(e[1], e[0]);
    EXPECT_LT(e[2], e[1]);
    EXPECT_GE(fit_order(h, e), 1.8) << to_string(scheme);
  }
}

TEST(Convergence, OdeLimitIsSecondOrder) {
  Scenario s;
  s.options = ode_limit_options();
  s.nonlinear = false;
  s.damping.kind = "constant";
  const ConvergenceStudy st = convergence_order(s, 6, {101, 0.1});
  EXPECT_FALSE(st.invalid);
  EXPECT_NEAR(st.order, 2.0, 0.2);
}

TEST(Convergence, NonlinearRunAtLeast1p8) {
  Scenario s;
  const ConvergenceStudy st = convergence_order(s, 4, {501, 8e-3});
  EXPECT_FALSE(st.invalid);
  ASSERT_EQ(st.errors.size(), 3u);
  EXPECT_GE(st.order, 1.8);
}

TEST(Convergence, IdenticalLevelsAreInvalid) {
  Scenario s;
  const ConvergenceStudy st = convergence_study(s, {{201, 1e-2}, {201, 1e-2}, {201, 1e-2}});
  EXPECT_TRUE(st.invalid);
  for (double e : st.errors) EXPECT_EQ(e, 0.0);
}

TEST(Convergence, Preconditions) {
  Scenario s;
  EXPECT_THROW(convergence_order(s, 2, {201, 1e-2}), ConfigError);
  EXPECT_THROW(convergence_study(s, {{201, 1e-2}, {300, 1e-2}, {401, 1e-2}}), ConfigError);
  EXPECT_NEAR(fit_order({1.0, 0.5, 0.25}, {3.0, 0.75, 0.1875}), 2.0, 1e-12);
}
