// Acceptance report: one PASS/FAIL line per criterion.
// Exit status is 0 when every criterion was evaluated; --strict also
// requires every criterion to pass. --report PATH copies the lines to a file.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dkdv/experiments/config.hpp"
#include "dkdv/experiments/runner.hpp"
#include "dkdv/experiments/schema.hpp"
#include "dkdv/oracle.hpp"
#include "dkdv/scenario.hpp"
#include "dkdv/solver.hpp"

using namespace dkdv;
using namespace dkdv::experiments;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = DKDV_SOURCE_DIR;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
fs::path g_out;

struct Outcome {
  bool pass = false;
  std::string detail;
};

ExperimentConfig shipped(const std::string& name) {
  return load_config((kSource / "configs" / (name + ".json")).string());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const Json& find_fit(const Json& summary, const std::string& norm) {
  for (const Json& f : summary["fits"]) {
    if (f["norm"] == norm) return f;
  }
  throw Error("summary has no fit for " + norm);
}

bool fit_ok(const Json& f, double min_r2, std::ostringstream& os) {
  os << ' ' << f["norm"].get<std::string>() << ':';
  if (f["status"] != "ok") {
    os << f["status"].get<std::string>();
    return false;
  }
  const double rate = f["rate"].get<double>(), r2 = f["r_squared"].get<double>();
  os << " nu=" << fmt("%.4g", rate) << " R2=" << fmt("%.4f", r2);
  return rate > 0.0 && r2 >= min_r2;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sup_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// ------------------------------------------------------------------ criteria

Outcome analytic_rate() {
  const ExperimentConfig cfg = shipped("linear-const");
  const Json s = run_experiment(cfg, g_out / "linear-const");
  const Json& f = find_fit(s, "l2");
  if (f["status"] != "ok") return {false, "L2 fit: " + f["message"].get<std::string>()};
  const double nu = f["rate"].get<double>();
  return {nu >= 0.95 && nu <= 1.5,
          "a0=1 linear, nu=" + fmt("%.5f", nu) + " (need 0.95 <= nu <= 1.5), R2=" +
              fmt("%.6f", f["r_squared"].get<double>())};
}

Outcome gauge() {
  Scenario damped;
  damped.nonlinear = false;
  damped.damping.kind = "constant";
  damped.damping.a0 = 1.0;
  damped.final_time = 1.0;
  Scenario free = damped;
  free.damping.kind = "none";
  const Resolution r{2001, 1e-3};
  const State u = solve_scenario(damped, r, Scheme::ImexCnAb2);
  const State w = solve_scenario(free, r, Scheme::ImexCnAb2);
  std::vector<double> scaled(w.u.size());
  for (std::size_t i = 0; i < w.u.size(); ++i) scaled[i] = std::exp(-damped.damping.a0) * w.u[i];
  const double rel = sup_diff(u.u, scaled) / sup_abs(scaled);
  return {rel <= 1e-6, "N=2001 dt=1e-3 T=1, relative sup difference " + fmt("%.3e", rel) +
                           " (need <= 1e-6)"};
}

Outcome residuals() {
  const ExperimentConfig cfg = shipped("verify");
  const Json v = verify_experiment(cfg, g_out / "verify");
  const Json& finest = v["levels"].back();
  bool ok = finest["points"].get<std::size_t>() == 4001 && finest["dt"].get<double>() == 1e-3;
  double worst = 0.0, min_order = kInf;
  std::size_t n = 0;
  for (const Json& r : v["residuals"]) {
    ++n;
    worst = std::max(worst, std::abs(r["relative"].back().get<double>()));
    if (!r["order"].is_number()) {
      ok = false;
      min_order = -kInf;
      continue;
    }
    min_order = std::min(min_order, r["order"].get<double>());
  }
  ok = ok && n == 10 && worst <= 1e-3 && min_order >= 1.8;
  return {ok, std::to_string(n) + " weight x time-weight pairs, max relative at N=4001 " +
                  fmt("%.3e", worst) + " (need <= 1e-3), min order " + fmt("%.3f", min_order) +
                  " (need >= 1.8)"};
}

Json g_thm_decay;

Outcome thm_decay() {
  const ExperimentConfig cfg = shipped("thm-decay");
  g_thm_decay = run_experiment(cfg, g_out / "thm-decay");
  std::ostringstream os;
  bool ok = true;
  for (const char* n : {"l2", "poly1", "poly2"}) {
    ok = fit_ok(find_fit(g_thm_decay, n), 0.98, os) && ok;
  }
  for (const Json& l : g_thm_decay["lyapunov"]) {
    const bool dec = l["nonincreasing"].is_boolean() && l["nonincreasing"].get<bool>();
    os << " V" << l["m"].get<int>() << (dec ? ":nonincreasing" : ":increasing");
    ok = ok && dec && l["doublings"].get<int>() == 0;
  }
  ok = ok && g_thm_decay["lyapunov"].size() == 2;
  return {ok, os.str().substr(1) + " (need nu > 0, R2 >= 0.98)"};
}

Outcome expweight() {
  const ExperimentConfig cfg = shipped("expweight");
  const Json s = run_experiment(cfg, g_out / "expweight");
  const double b = 0.4, a0 = cfg.scenario.damping.a0;
  std::ostringstream os;
  os << "b=0.4 a0=" << a0 << " 4b^3+b=" << fmt("%.3f", 4 * b * b * b + b) << ',';
  const bool ok = 4 * b * b * b + b < a0 && fit_ok(find_fit(s, "exp0.4"), 0.98, os);
  return {ok, os.str() + " (need nu > 0, R2 >= 0.98)"};
}

Outcome dissipativity() {
  ExperimentConfig step = shipped("thm-decay");
  ExperimentConfig constant = shipped("linear-const");
  std::ostringstream os;
  bool ok = true;
  double worst = kInf, worst_const = kInf;
  for (ExperimentConfig* cfg : {&step, &constant}) {
    cfg->diagnostics.abscissa_b = {0.1, 0.25, 0.5};
    const Json s = spectrum_experiment(*cfg, g_out / ("spectrum-" + cfg->name));
    const double dx = cfg->scenario.length / static_cast<double>(cfg->points - 1);
    const double a0 = cfg->scenario.damping.a0;
    for (const Json& a : s["abscissa"]) {
      const double b = a["b"].get<double>(), omega = a["omega"].get<double>();
      const double margin = b * b * b + b + 10 * dx * dx - omega;
      worst = std::min(worst, margin);
      if (cfg == &constant) worst_const = std::min(worst_const, margin - a0);
    }
  }
  ok = worst >= 0.0 && worst_const >= 0.0;
  os << "b in {0.1,0.25,0.5}, step and constant damping at N=2001: min margin "
     << fmt("%.4f", worst) << ", constant-damping min margin " << fmt("%.4f", worst_const)
     << " (need >= 0)";
  return {ok, os.str()};
}

Outcome smoothing() {
  const ExperimentConfig base = shipped("smoothing");
  std::vector<double> h1, weighted;
  for (std::size_t l = 0; l < 3; ++l) {
    ExperimentConfig c = base;
    const std::size_t f = std::size_t{1} << l;
    c.points = (base.points - 1) / 2 * f + 1;
    c.dt = base.dt * 2 / static_cast<double>(f);
    c.stride = base.stride / 2 * f;
    c.name = "smoothing-" + std::to_string(c.points);
    const Json s = run_experiment(c, g_out / c.name);
    ExperimentConfig small = c;
    small.name += "-small";
    small.scenario.datum.amplitude = 0.1;
    const Json ss = run_experiment(small, g_out / small.name);
    for (const Json& e : s["smoothing"]) {
      if (e["norm"] == "h1") {
        h1.push_back(e["value"].is_number() ? e["value"].get<double>() : kNaN);
      }
    }
    for (const Json& e : ss["smoothing"]) {
      if (e["norm"] == "h1-weighted" && e["m"] == 2) {
        weighted.push_back(e["value"].is_number() ? e["value"].get<double>() : kNaN);
      }
    }
  }
  auto spread = [](const std::vector<double>& v) -> double {
    if (v.size() != 3) return kInf;
    for (double x : v) {
      if (!std::isfinite(x) || !(x > 0.0)) return kInf;
    }
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  const double r1 = spread(h1), r2 = spread(weighted);
  std::ostringstream os;
  os << "hat datum, N=1001/2001/4001: H1 statistic " << fmt("%.4f", h1.empty() ? kNaN : h1.back())
     << " spread x" << fmt("%.3f", r1) << "; weighted m=2 (A=0.1) "
     << fmt("%.4f", weighted.empty() ? kNaN : weighted.back()) << " spread x" << fmt("%.3f", r2)
     << " (need < 2)";
  return {r1 < 2.0 && r2 < 2.0, os.str()};
}

Outcome inequalities() {
  if (g_thm_decay.is_null()) {
    g_thm_decay = run_experiment(shipped("thm-decay"), g_out / "thm-decay");
  }
  const Json& ineq = g_thm_decay["inequalities"];
  if (ineq.is_null()) return {false, "thm-decay summary has no inequality report"};
  const std::size_t states =
      ineq["corpus_states"].get<std::size_t>() + ineq["trajectory_states"].get<std::size_t>();
  bool ok = ineq["corpus_states"].get<std::size_t>() == 100 && ineq["slack"].get<double>() == 1.05;
  std::ostringstream os;
  os << "100 seeded states + " << ineq["trajectory_states"].get<std::size_t>()
     << " snapshots, slack 1.05:";
  for (const char* name : {"moser", "weighted_sup", "weighted_poincare", "weighted_cubic"}) {
    bool found = false;
    for (const Json& c : ineq["checks"]) {
      if (c["name"] != name) continue;
      found = true;
      const std::size_t fails = c["failures"].get<std::size_t>();
      os << ' ' << name << " max ratio " << fmt("%.3f", c["max_ratio"].get<double>());
      ok = ok && fails == 0 && c["evaluated"].get<std::size_t>() == states;
    }
    ok = ok && found;
  }
  return {ok, os.str()};
}

Outcome cross_solver() {
  Scenario s;
  s.final_time = 2.0;
  const double amplitude = s.datum.amplitude;
  const Resolution levels[] = {{501, 8e-3}, {1001, 4e-3}, {2001, 2e-3}, {4001, 1e-3}};
  const Scheme schemes[] = {Scheme::ImexCnAb2, Scheme::CnNewton, Scheme::PicardDuhamel};
  std::vector<double> hs;
  std::vector<std::vector<double>> diffs(3);
  bool bounded = true;
  for (const Resolution& r : levels) {
    std::vector<State> u;
    for (Scheme sc : schemes) u.push_back(solve_scenario(s, r, sc));
    const double dx = s.length / static_cast<double>(r.points - 1);
    const double bound = 10.0 * (r.dt * r.dt + dx * dx) * amplitude;
    const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
    for (std::size_t p = 0; p < 3; ++p) {
      const double d = sup_diff(u[pairs[p].first].u, u[pairs[p].second].u);
      diffs[p].push_back(d);
      bounded = bounded && d <= bound;
    }
    hs.push_back(r.dt);
  }
  double min_order = kInf, max_diff = 0.0;
  for (const auto& d : diffs) {
    min_order = std::min(min_order, fit_order(hs, d));
    max_diff = std::max(max_diff, d.back());
  }
  std::ostringstream os;
  os << "T=2, N=501..4001: finest max pairwise difference " << fmt("%.3e", max_diff)
     << ", all within 10(dt^2+dx^2)A: " << (bounded ? "yes" : "no") << ", min order "
     << fmt("%.3f", min_order) << " (need >= 1.8)";
  return {bounded && min_order >= 1.8, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto schema = load_json(kSource / "schemas/summary.schema.json");
  bool ok = true;
  std::ostringstream os;
  std::size_t compared = 0, validated = 0;
  for (const char* name : {"linear-const", "expweight", "smoothing"}) {
    const ExperimentConfig cfg = shipped(name);
    const fs::path a = g_out / "det" / name / "a", b = g_out / "det" / name / "b";
    run_experiment(cfg, a);
    run_experiment(cfg, b);
    for (const char* f : {"series.csv", "summary.json", "effective_config.json"}) {
      ++compared;
      if (slurp(a / f) != slurp(b / f)) {
        ok = false;
        os << ' ' << name << '/' << f << " differs;";
      }
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(g_out)) {
    if (e.path().filename() != "summary.json") continue;
    ++validated;
    const auto errs = validate_against_schema(schema, load_json(e.path()));
    if (!errs.empty()) {
      ok = false;
      os << ' ' << e.path().string() << ": " << errs.front() << ';';
    }
  }
  return {ok && validated > 0, std::to_string(compared) + " files byte-identical on rerun, " +
                                   std::to_string(validated) + " summaries schema-valid" +
                                   os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::ofstream report;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) strict = true;
    if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) report.open(argv[++i]);
  }
  auto emit = [&](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report.is_open()) report << line << '\n' << std::flush;
  };
  g_out = fs::temp_directory_path() / "dkdv_acceptance";
  fs::remove_all(g_out);
  fs::create_directories(g_out);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"analytic L2 rate, constant damping", analytic_rate},
      {"gauge transformation", gauge},
      {"identity-residual convergence", residuals},
      {"thm-decay regime", thm_decay},
      {"exponential-weight regime", expweight},
      {"semigroup dissipativity", dissipativity},
      {"Kato smoothing", smoothing},
      {"inequality corpus", inequalities},
      {"cross-solver agreement", cross_solver},
      {"determinism and schema", determinism},
  };
  int passed = 0, errors = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
      ++errors;
    }
    passed += o.pass ? 1 : 0;
    char head[48];
    std::snprintf(head, sizeof head, "criterion %2zu %s: ", i + 1, o.pass ? "PASS" : "FAIL");
    emit(head + criteria[i].first + " | " + o.detail);
  }
  emit(std::to_string(passed) + "/" + std::to_string(criteria.size()) + " criteria passed");
  if (errors > 0) return 2;
  return strict && passed != static_cast<int>(criteria.size()) ? 1 : 0;
}
