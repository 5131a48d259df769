#include "dkdv/experiments/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "dkdv/diagnostics.hpp"
#include "dkdv/oracle.hpp"
#include "dkdv/spectral.hpp"

namespace dkdv::experiments {

namespace fs = std::filesystem;

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

WeightSpec make_weight(const Grid& g, const WeightRequest& w) {
  return build_weight(g, w.family, w.param);
}

std::vector<double> lyapunov_d(const LyapunovRequest& l) {
  return l.d.empty() ? default_lyapunov_coefficients(l.m) : l.d;
}

std::vector<double> default_abscissa_b(const ExperimentConfig& cfg) {
  if (!cfg.diagnostics.abscissa_b.empty()) return cfg.diagnostics.abscissa_b;
  return {0.1, 0.25, 0.5};
}

SmoothingSpec smoothing_spec(const SmoothingRequest& r) {
  SmoothingSpec s;
  if (r.norm == "h1") {
    s.norm = SmoothingNorm::H1;
  } else if (r.norm == "h1-weighted") {
    s.norm = SmoothingNorm::H1Weighted;
    s.m = r.m;
  } else {
    s.norm = SmoothingNorm::HsExponential;
    s.b = r.b;
    s.s = r.s;
  }
  return s;
}

Json fit_json(const std::string& norm, const std::vector<double>& times,
              const std::vector<double>& values,
              const std::optional<std::pair<double, double>>& window) {
  Json j;
  j["norm"] = norm;
  try {
    const DecayFit f = window ? fit_decay(times, values, window->first, window->second, norm)
                              : fit_decay(times, values, norm);
    if (f.constant_series) {
      j["status"] = "insufficient-signal";
      j["message"] = "series is constant";
    } else {
      j["status"] = "ok";
      j["message"] = "";
    }
    j["rate"] = num(f.rate);
    j["prefactor"] = num(f.prefactor);
    j["r_squared"] = num(f.r_squared);
    j["t_a"] = f.t_a;
    j["t_b"] = f.t_b;
    j["samples"] = f.samples;
    j["floor_reached"] = f.floor_reached;
    j["constant_series"] = f.constant_series;
  } catch (const InsufficientData& e) {
    j["status"] = "insufficient-signal";
    j["message"] = e.what();
    j["rate"] = nullptr;
    j["prefactor"] = nullptr;
    j["r_squared"] = nullptr;
    j["t_a"] = nullptr;
    j["t_b"] = nullptr;
    j["samples"] = 0;
    j["floor_reached"] = nullptr;
    j["constant_series"] = false;
  }
  return j;
}

struct InequalityTally {
  std::size_t evaluated = 0;
  std::size_t failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
};

Json inequality_json(const Grid& grid, const std::vector<State>& trajectory_states,
                     const DiagnosticsConfig& d) {
  std::vector<State> corpus = random_smooth_states(grid, d.corpus_size, d.seed);
  std::map<std::string, InequalityTally> tally;
  std::vector<std::string> order;
  std::map<double, double> c_eps;
  auto add = [&](const State& s) {
    const InequalityReport r = check_inequalities(grid, s, d.inequality_b);
    for (const InequalityCheck& c : r.checks) {
      if (!tally.count(c.name)) order.push_back(c.name);
      InequalityTally& t = tally[c.name];
      ++t.evaluated;
      if (!c.pass) ++t.failures;
      t.min_margin = std::min(t.min_margin, c.margin);
      if (c.rhs > 0.0) t.max_ratio = std::max(t.max_ratio, c.lhs / c.rhs);
    }
    for (const auto& [eps, c] : r.c_eps) c_eps[eps] = std::max(c_eps[eps], c);
  };
  for (const State& s : corpus) add(s);
  for (const State& s : trajectory_states) add(s);

  Json j;
  j["seed"] = d.seed;
  j["corpus_states"] = corpus.size();
  j["trajectory_states"] = trajectory_states.size();
  j["b"] = d.inequality_b;
  j["slack"] = kInequalitySlack;
  j["checks"] = Json::array();
  bool pass = true;
  for (const std::string& name : order) {
    const InequalityTally& t = tally[name];
    pass = pass && t.failures == 0;
    j["checks"].push_back({{"name", name},
                           {"evaluated", t.evaluated},
                           {"failures", t.failures},
                           {"min_margin", num(t.min_margin)},
                           {"max_ratio", num(t.max_ratio)}});
  }
  j["c_eps"] = Json::array();
  for (const auto& [eps, c] : c_eps) {
    j["c_eps"].push_back(
        {{"eps", eps}, {"max_needed", num(c)}, {"young", num(young_constant(eps))}});
  }
  j["pass"] = pass;
  return j;
}

Json abscissa_json(const OperatorSet& ops, const DampingSpec& damping, double b,
                   bool eigenvalue, const Json* fit) {
  const GeneratorAnalysis a = analyze_generator(ops, b, eigenvalue);
  const double dx = ops.dx();
  const double bound = b * b * b + b + 10.0 * dx * dx;
  Json j;
  j["b"] = b;
  j["omega"] = a.abscissa;
  j["analytic_bound"] = a.analytic_bound;
  j["bound"] = bound;
  j["margin"] = bound - a.abscissa;
  bool pass = a.abscissa <= bound;
  if (damping.kind == "constant") {
    const double cb = bound - damping.a0;
    j["constant_bound"] = cb;
    j["constant_margin"] = cb - a.abscissa;
    pass = pass && a.abscissa <= cb;
  } else {
    j["constant_bound"] = nullptr;
    j["constant_margin"] = nullptr;
  }
  j["leading_eigenvalue"] =
      a.leading_eigenvalue ? num(*a.leading_eigenvalue) : Json(nullptr);
  j["bisection_steps"] = a.bisection_steps;
  j["power_iterations"] = a.power_iterations;
  j["pass"] = pass;
  if (fit != nullptr && (*fit)["status"] == "ok") {
    DecayFit f;
    f.norm = (*fit)["norm"].get<std::string>();
    f.rate = (*fit)["rate"].get<double>();
    const PredictionReport p = predicted_vs_fitted(a, f);
    j["prediction"] = {{"norm", p.norm},
                       {"guaranteed_rate", p.guaranteed_rate},
                       {"fitted_rate", p.fitted_rate},
                       {"flag", p.flag}};
  } else {
    j["prediction"] = nullptr;
  }
  return j;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentConfig refined(const ExperimentConfig& cfg, std::size_t level) {
  ExperimentConfig c = cfg;
  const std::size_t f = std::size_t{1} << level;
  c.points = (cfg.points - 1) * f + 1;
  c.dt = cfg.dt / static_cast<double>(f);
  c.stride = cfg.stride * f;
  return c;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

fs::path resolve_output_dir(const ExperimentConfig& cfg,
                            const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return fs::path(*flag);
  if (const char* env = std::getenv(kOutDirVariable); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  if (!cfg.output_dir.empty()) return fs::path(cfg.output_dir);
  return fs::path("out") / cfg.name;
}

Simulation simulate(const ExperimentConfig& cfg) {
  validate(cfg);
  const Scenario& s = cfg.scenario;
  Grid grid = build_grid(s.length, cfg.points);
  OperatorSet ops = build_operators(grid, make_damping(grid, s.damping), s.options);
  SampledDatum datum = sample_initial(grid, s.datum);
  std::vector<WeightSpec> weights;
  std::set<std::string> labels;
  for (const WeightRequest& w : cfg.diagnostics.weights) {
    WeightSpec spec = make_weight(grid, w);
    if (labels.insert(spec.label).second) weights.push_back(std::move(spec));
  }
  Trajectory traj = solve(datum.state, ops, cfg.solver_config(), weights);
  if (!datum.warning.empty()) traj.warnings.insert(traj.warnings.begin(), datum.warning);
  return Simulation{std::move(grid), std::move(ops), std::move(datum), std::move(weights),
                    std::move(traj)};
}

Json summarize(const ExperimentConfig& cfg, const Simulation& sim) {
  const Trajectory& tr = sim.trajectory;
  const DiagnosticsConfig& d = cfg.diagnostics;
  Json j;
  j["name"] = cfg.name;
  j["config_hash"] = hex64(fnv1a(to_json(cfg).dump()));
  j["grid"] = {{"length", sim.grid.length()}, {"points", sim.grid.size()}, {"dx", sim.grid.dx()}};
  j["solver"] = {{"scheme", to_string(cfg.scheme)},
                 {"dt", cfg.dt},
                 {"final_time", tr.final_time()},
                 {"steps", tr.step_times.size() - 1},
                 {"nonlinear", cfg.scenario.nonlinear},
                 {"newton_iterations", tr.newton_iterations},
                 {"picard_iterations", tr.picard_iterations}};
  j["datum"] = {{"tag", cfg.scenario.datum.tag},
                {"clamp_perturbation", sim.datum.clamp_perturbation}};
  j["warnings"] = tr.warnings;

  // fits
  j["fits"] = Json::array();
  j["fits"].push_back(fit_json("l2", tr.step_times, l2_norm_series(tr), d.fit_window));
  for (const WeightSpec& w : sim.weights) {
    j["fits"].push_back(
        fit_json(w.label, tr.step_times, weighted_norm_series(tr, w.label), d.fit_window));
  }

  // thresholds for the exponential weights
  j["thresholds"] = Json::array();
  for (const WeightSpec& w : sim.weights) {
    if (w.family != WeightFamily::Exponential) continue;
    const double v = 4.0 * w.b * w.b * w.b + w.b;
    j["thresholds"].push_back({{"b", w.b},
                               {"value", v},
                               {"a0", cfg.scenario.damping.a0},
                               {"holds", v < cfg.scenario.damping.a0}});
  }

  // Lyapunov
  bool lyap_pass = true;
  j["lyapunov"] = Json::array();
  for (const LyapunovRequest& l : d.lyapunov) {
    Json e;
    e["m"] = l.m;
    e["period"] = d.lyapunov_period;
    try {
      const LyapunovCheck c = lyapunov_decrease(tr, l.m, lyapunov_d(l), d.lyapunov_period);
      e["status"] = "ok";
      e["d"] = c.series.d;
      e["nonincreasing"] = c.nonincreasing;
      e["doublings"] = c.doublings;
      e["flag"] = c.flag;
      e["times"] = c.series.times;
      e["values"] = c.series.values;
      lyap_pass = lyap_pass && c.nonincreasing;
    } catch (const InsufficientData& ex) {
      e["status"] = "insufficient-data";
      e["d"] = lyapunov_d(l);
      e["nonincreasing"] = nullptr;
      e["doublings"] = 0;
      e["flag"] = ex.what();
      e["times"] = Json::array();
      e["values"] = Json::array();
      lyap_pass = false;
    }
    j["lyapunov"].push_back(e);
  }

  // identity residuals
  bool res_pass = true;
  j["residuals"] = Json::array();
  if (d.residuals) {
    for (const WeightSpec& w : sim.weights) {
      for (const std::string& tw : d.time_weights) {
        const IdentityResidual r = identity_residual(tr, w, time_weight_from_string(tw), 0.0,
                                                     tr.final_time());
        const bool ok = std::abs(r.relative) <= d.residual_tolerance;
        res_pass = res_pass && ok;
        Json terms = Json::object();
        for (const auto& [name, v] : r.terms) terms[name] = v;
        j["residuals"].push_back({{"weight", r.weight},
                                  {"time_weight", tw},
                                  {"residual", r.residual},
                                  {"scale", r.scale},
                                  {"relative", r.relative},
                                  {"terms", terms},
                                  {"pass", ok}});
      }
    }
  }

  // smoothing
  j["smoothing"] = Json::array();
  for (const SmoothingRequest& r : d.smoothing) {
    Json e = {{"norm", r.norm}, {"m", r.m}, {"b", r.b}, {"s", r.s}, {"mu", r.mu}};
    const double t_min = r.t_min > 0.0 ? r.t_min : cfg.dt;
    e["t_min"] = t_min;
    try {
      e["value"] = num(smoothing_statistic(tr, smoothing_spec(r), r.mu, t_min));
      e["status"] = "ok";
    } catch (const UndefinedStatistic& ex) {
      e["value"] = nullptr;
      e["status"] = std::string("undefined: ") + ex.what();
    }
    j["smoothing"].push_back(e);
  }

  // inequalities
  bool ineq_pass = true;
  if (d.inequalities) {
    j["inequalities"] = inequality_json(sim.grid, tr.states, d);
    ineq_pass = j["inequalities"]["pass"].get<bool>();
  } else {
    j["inequalities"] = nullptr;
  }

  // abscissa
  bool abs_pass = true;
  j["abscissa"] = Json::array();
  for (double b : d.abscissa_b) {
    const Json* fit = nullptr;
    for (const Json& f : j["fits"]) {
      for (const WeightSpec& w : sim.weights) {
        if (w.family == WeightFamily::Exponential && w.b == b && f["norm"] == w.label) fit = &f;
      }
    }
    Json a = abscissa_json(sim.ops, cfg.scenario.damping, b, d.leading_eigenvalue, fit);
    abs_pass = abs_pass && a["pass"].get<bool>();
    j["abscissa"].push_back(a);
  }

  const Json& l2 = j["fits"][0];
  Json pass;
  pass["l2_decay"] = l2["status"] == "ok" && l2["rate"].get<double>() > 0.0;
  pass["lyapunov"] = d.lyapunov.empty() ? Json(nullptr) : Json(lyap_pass);
  pass["residuals"] = j["residuals"].empty() ? Json(nullptr) : Json(res_pass);
  pass["inequalities"] = d.inequalities ? Json(ineq_pass) : Json(nullptr);
  pass["abscissa"] = d.abscissa_b.empty() ? Json(nullptr) : Json(abs_pass);
  j["pass"] = pass;
  return j;
}

void write_series_csv(const fs::path& path, const ExperimentConfig& cfg,
                      const Simulation& sim) {
  const Trajectory& tr = sim.trajectory;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "t,l2";
  for (const WeightSpec& w : sim.weights) os << ",norm_" << w.label;
  for (const LyapunovRequest& l : cfg.diagnostics.lyapunov) os << ",V" << l.m;
  os << ",trace,tail_mass\n";

  const std::vector<double> l2 = l2_norm_series(tr);
  std::vector<std::vector<double>> weighted;
  for (const WeightSpec& w : sim.weights) weighted.push_back(weighted_norm_series(tr, w.label));
  for (const State& s : tr.states) {
    const std::size_t k = tr.lattice_index(s.t);
    os << format_double(s.t) << ',' << format_double(l2[k]);
    for (const auto& series : weighted) os << ',' << format_double(series[k]);
    for (const LyapunovRequest& l : cfg.diagnostics.lyapunov) {
      os << ',' << format_double(lyapunov(sim.grid, s, l.m, lyapunov_d(l)));
    }
    os << ',' << format_double(tr.traces[k]) << ',' << format_double(tr.tail_mass[k]) << '\n';
  }
  if (!os) throw ConfigError("write to " + path.string() + " failed");
}

Json run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const Simulation sim = simulate(cfg);
  Json summary = summarize(cfg, sim);
  ensure_dir(out_dir);
  write_series_csv(out_dir / "series.csv", cfg, sim);
  write_json(out_dir / "summary.json", summary);
  write_json(out_dir / "effective_config.json", to_json(cfg));
  return summary;
}

constexpr double kMinOrder = 1.8;

Json verify_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const DiagnosticsConfig& d = cfg.diagnostics;
  const std::size_t levels = d.levels;
  Json j;
  j["name"] = cfg.name;
  j["config_hash"] = hex64(fnv1a(to_json(cfg).dump()));
  j["levels"] = Json::array();

  // relative[weight][time weight][level]
  std::vector<std::string> labels;
  std::map<std::pair<std::string, std::string>, std::vector<IdentityResidual>> table;
  std::vector<double> dts;
  std::vector<std::string> warnings;
  std::optional<Simulation> finest;
  for (std::size_t l = 0; l < levels; ++l) {
    const ExperimentConfig c = refined(cfg, l);
    Simulation sim = simulate(c);
    const Trajectory& tr = sim.trajectory;
    j["levels"].push_back({{"points", c.points}, {"dt", c.dt}, {"dx", sim.grid.dx()}});
    dts.push_back(c.dt);
    for (const std::string& w : tr.warnings) {
      warnings.push_back("level " + std::to_string(l) + ": " + w);
    }
    for (const WeightSpec& w : sim.weights) {
      if (l == 0) labels.push_back(w.label);
      for (const std::string& tw : d.time_weights) {
        table[{w.label, tw}].push_back(
            identity_residual(tr, w, time_weight_from_string(tw), 0.0, tr.final_time()));
      }
    }
    if (l + 1 == levels) finest.emplace(std::move(sim));
  }
  j["warnings"] = warnings;

  bool res_pass = true;
  bool vacuous = true;
  j["residuals"] = Json::array();
  for (const std::string& label : labels) {
    for (const std::string& tw : d.time_weights) {
      const auto& rs = table[{label, tw}];
      Json e;
      e["weight"] = label;
      e["time_weight"] = tw;
      std::vector<double> rel, absr;
      Json relj = Json::array(), resj = Json::array(), scalej = Json::array();
      for (const IdentityResidual& r : rs) {
        rel.push_back(std::abs(r.relative));
        relj.push_back(r.relative);
        resj.push_back(r.residual);
        scalej.push_back(r.scale);
        if (r.scale > 0.0) vacuous = false;
      }
      e["relative"] = relj;
      e["residual"] = resj;
      e["scale"] = scalej;
      bool decreasing = true;
      for (std::size_t i = 0; i < rel.size(); ++i) {
        if (!(rel[i] > 0.0) || (i > 0 && !(rel[i] < rel[i - 1]))) decreasing = false;
      }
      if (decreasing) {
        e["order"] = num(fit_order(dts, rel));
        e["order_flag"] = "";
      } else {
        e["order"] = nullptr;
        e["order_flag"] = "residuals not positive and decreasing";
      }
      const bool within = rel.back() <= d.residual_tolerance;
      const bool converging = decreasing && e["order"].get<double>() >= kMinOrder;
      e["within_tolerance"] = within;
      e["status"] = within ? "within-tolerance" : converging ? "resolution-limited" : "failed";
      e["pass"] = within || converging;
      res_pass = res_pass && (within || converging);
      j["residuals"].push_back(e);
    }
  }

  const Json ineq = inequality_json(finest->grid, finest->trajectory.states, d);
  j["inequalities"] = ineq;

  bool abs_pass = true;
  j["abscissa"] = Json::array();
  for (double b : default_abscissa_b(cfg)) {
    Json a = abscissa_json(finest->ops, cfg.scenario.damping, b, false, nullptr);
    abs_pass = abs_pass && a["pass"].get<bool>();
    j["abscissa"].push_back(a);
  }
  j["vacuous"] = vacuous;
  j["pass"] = {{"residuals", res_pass},
               {"inequalities", ineq["pass"].get<bool>()},
               {"abscissa", abs_pass},
               {"all", res_pass && ineq["pass"].get<bool>() && abs_pass}};

  ensure_dir(out_dir);
  write_json(out_dir / "verify.json", j);
  write_json(out_dir / "effective_config.json", to_json(cfg));
  return j;
}

SweepCapExceeded::SweepCapExceeded(std::size_t runs, std::size_t cap)
    : ConfigError("sweep has " + std::to_string(runs) + " runs, more than the cap of " +
                  std::to_string(cap)),
      runs_(runs) {}

Json sweep_experiment(const ExperimentConfig& cfg, const fs::path& out_dir,
                      std::size_t workers) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  for (const auto& [k, v] : cfg.sweep.parameters) {
    names.push_back(k);
    values.push_back(v);
  }
  Json j;
  j["name"] = cfg.name;
  j["parameters"] = names;
  j["warnings"] = Json::array();

  std::size_t count = names.empty() ? 0 : 1;
  for (const auto& v : values) count *= v.size();
  if (names.empty()) j["warnings"].push_back("no sweep parameters given");
  if (!names.empty() && count == 0) j["warnings"].push_back("a sweep range is empty");
  if (count > cfg.sweep.max_runs) throw SweepCapExceeded(count, cfg.sweep.max_runs);

  // combinations in row-major order over the sorted parameter names
  std::vector<std::vector<double>> combos;
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::vector<double> combo(names.size());
    std::size_t rem = idx;
    for (std::size_t p = names.size(); p-- > 0;) {
      combo[p] = values[p][rem % values[p].size()];
      rem /= values[p].size();
    }
    combos.push_back(combo);
  }
  std::vector<ExperimentConfig> cfgs;
  for (std::size_t idx = 0; idx < count; ++idx) {
    ExperimentConfig c = cfg;
    for (std::size_t p = 0; p < names.size(); ++p) c = with_parameter(c, names[p], combos[idx][p]);
    c.name = cfg.name + "-" + std::to_string(idx);
    c.sweep = {};
    cfgs.push_back(std::move(c));
  }

  ensure_dir(out_dir);
  std::vector<Json> summaries(count);
  std::vector<std::string> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        char dir[32];
        std::snprintf(dir, sizeof dir, "run_%03zu", i);
        summaries[i] = run_experiment(cfgs[i], out_dir / dir);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  j["runs"] = count;
  j["rows"] = Json::array();
  std::ostringstream csv;
  csv << "index";
  for (const auto& n : names) csv << ',' << n;
  csv << ",threshold_value,threshold_holds,l2_rate,l2b_rate,l2b_r_squared,lyapunov_ok,error\n";
  for (std::size_t i = 0; i < count; ++i) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "run_%03zu", i);
    Json row;
    row["index"] = i;
    row["dir"] = dir;
    Json params = Json::object();
    for (std::size_t p = 0; p < names.size(); ++p) params[names[p]] = combos[i][p];
    row["parameters"] = params;
    row["error"] = errors[i];
    row["threshold"] = nullptr;
    row["l2_rate"] = nullptr;
    row["l2b_rate"] = nullptr;
    row["l2b_r_squared"] = nullptr;
    row["lyapunov"] = Json::array();
    if (errors[i].empty()) {
      const Json& s = summaries[i];
      if (!s["thresholds"].empty()) row["threshold"] = s["thresholds"][0];
      row["l2_rate"] = s["fits"][0]["rate"];
      for (const Json& f : s["fits"]) {
        if (f["norm"].get<std::string>().rfind("exp", 0) == 0) {
          row["l2b_rate"] = f["rate"];
          row["l2b_r_squared"] = f["r_squared"];
          break;
        }
      }
      for (const Json& l : s["lyapunov"]) {
        row["lyapunov"].push_back(
            {{"m", l["m"]}, {"nonincreasing", l["nonincreasing"]}, {"values", l["values"]}});
      }
    }
    auto cell = [](const Json& v) -> std::string {
      if (v.is_null()) return "";
      if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
      return format_double(v.get<double>());
    };
    csv << i;
    for (std::size_t p = 0; p < names.size(); ++p) csv << ',' << format_double(combos[i][p]);
    const Json& th = row["threshold"];
    csv << ',' << (th.is_null() ? "" : cell(th["value"])) << ','
        << (th.is_null() ? "" : cell(th["holds"])) << ',' << cell(row["l2_rate"]) << ','
        << cell(row["l2b_rate"]) << ',' << cell(row["l2b_r_squared"]) << ',';
    if (row["lyapunov"].empty()) {
      csv << "";
    } else {
      bool ok = true;
      for (const Json& l : row["lyapunov"]) ok = ok && l["nonincreasing"] == true;
      csv << (ok ? "true" : "false");
    }
    csv << ',' << '"' << errors[i] << '"' << '\n';
    j["rows"].push_back(row);
  }
  write_json(out_dir / "sweep.json", j);
  std::ofstream(out_dir / "sweep.csv", std::ios::binary | std::ios::trunc) << csv.str();
  write_json(out_dir / "effective_config.json", to_json(cfg));
  return j;
}

Json spectrum_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  validate(cfg);
  const Scenario& s = cfg.scenario;
  const Grid grid = build_grid(s.length, cfg.points);
  const OperatorSet ops = build_operators(grid, make_damping(grid, s.damping), s.options);
  Json j;
  j["name"] = cfg.name;
  j["grid"] = {{"length", grid.length()}, {"points", grid.size()}, {"dx", grid.dx()}};
  j["damping"] = {{"kind", s.damping.kind}, {"a0", s.damping.a0}, {"x0", s.damping.x0}};
  j["abscissa"] = Json::array();
  bool pass = true;
  for (double b : default_abscissa_b(cfg)) {
    Json a = abscissa_json(ops, s.damping, b, cfg.diagnostics.leading_eigenvalue, nullptr);
    pass = pass && a["pass"].get<bool>();
    j["abscissa"].push_back(a);
  }
  j["pass"] = pass;
  ensure_dir(out_dir);
  write_json(out_dir / "spectrum.json", j);
  return j;
}

std::vector<double> SeriesTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("no column '" + name + "'");
  const std::size_t c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

SeriesTable read_series_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  SeriesTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + " is empty");
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) t.columns.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                          ": not a number: '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " values");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json fit_series(const SeriesTable& table,
                const std::optional<std::pair<double, double>>& window) {
  const std::vector<double> t = table.column("t");
  Json j;
  j["rows"] = table.rows.size();
  j["fits"] = Json::array();
  for (const std::string& c : table.columns) {
    if (c == "t" || c == "trace" || c == "tail_mass") continue;
    j["fits"].push_back(fit_json(c, t, table.column(c), window));
  }
  return j;
}

}  // namespace dkdv::experiments
