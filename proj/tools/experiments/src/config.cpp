#include "dkdv/experiments/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dkdv/diagnostics.hpp"

namespace dkdv::experiments {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigParseError(field, "field '" + field + "': " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Typed access to one JSON object that remembers which keys were read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number()) fail(join(path_, key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(join(path_, key), "must be finite");
    }
  }

  void read(const std::string& key, int& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number_integer()) fail(join(path_, key), "expected an integer");
      out = v->get<int>();
    }
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        fail(join(path_, key), "expected a nonnegative integer");
      }
      out = v->get<std::size_t>();
    }
  }

  void read(const std::string& key, std::uint64_t& out, int) {
    if (const json* v = raw(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        fail(join(path_, key), "expected a nonnegative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (!v->is_boolean()) fail(join(path_, key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = raw(key)) {
      if (!v->is_string()) fail(join(path_, key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const std::string& key, std::vector<double>& out) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) fail(join(path_, key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) {
          fail(join(path_, key) + "[" + std::to_string(i) + "]", "expected a number");
        }
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void read(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) fail(join(path_, key), "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) {
          fail(join(path_, key) + "[" + std::to_string(i) + "]", "expected a string");
        }
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  template <typename F>
  void section(const std::string& key, F&& f) {
    if (const json* v = raw(key)) {
      Section s(*v, join(path_, key));
      f(s);
      s.finish();
    }
  }

  template <typename F>
  void list(const std::string& key, F&& f) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) fail(join(path_, key), "expected an array");
      for (std::size_t i = 0; i < v->size(); ++i) {
        Section s((*v)[i], join(path_, key) + "[" + std::to_string(i) + "]");
        f(s);
        s.finish();
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(join(path_, it.key()), "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const std::set<std::string> kFamilies{"unit", "polynomial", "exponential", "linear"};
const std::set<std::string> kSmoothing{"h1", "h1-weighted", "hs-exponential"};
const std::set<std::string> kTags{"gaussian", "sech2", "hat", "bump", "zero", "samples"};
const std::set<std::string> kDamping{"step", "smooth", "constant", "none"};

}  // namespace

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig c;
  c.dt = dt;
  c.final_time = scenario.final_time;
  c.scheme = scheme;
  c.nonlinear = scenario.nonlinear;
  c.newton_tol = newton_tol;
  c.newton_max_iter = newton_max_iter;
  c.picard_tol = picard_tol;
  c.picard_max_iter = picard_max_iter;
  c.panel = panel;
  c.stride = stride;
  c.tail_fraction = tail_fraction;
  c.tail_tolerance = tail_tolerance;
  return c;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_json(a) == to_json(b);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError("<syntax>", source + ": " + location(text, e.byte) +
                                           ": malformed JSON");
  }

  ExperimentConfig cfg;
  Section root(doc, "");
  root.read("name", cfg.name);

  root.section("grid", [&](Section& s) {
    s.read("length", cfg.scenario.length);
    s.read("points", cfg.points);
  });

  root.section("damping", [&](Section& s) {
    DampingSpec& d = cfg.scenario.damping;
    s.read("kind", d.kind);
    if (!kDamping.count(d.kind)) {
      fail("damping.kind", "expected step, smooth, constant or none");
    }
    s.read("a0", d.a0);
    s.read("x0", d.x0);
    s.read("ramp_width", d.ramp_width);
  });

  root.section("initial", [&](Section& s) {
    InitialDatum& d = cfg.scenario.datum;
    s.read("tag", d.tag);
    if (!kTags.count(d.tag)) {
      fail("initial.tag", "expected gaussian, sech2, hat, bump, zero or samples");
    }
    s.read("amplitude", d.amplitude);
    s.read("center", d.center);
    s.read("width", d.width);
    s.read("samples", d.samples);
  });

  root.section("solver", [&](Section& s) {
    std::string scheme = to_string(cfg.scheme);
    s.read("scheme", scheme);
    try {
      cfg.scheme = scheme_from_string(scheme);
    } catch (const ConfigError&) {
      fail("solver.scheme", "expected imex-cn-ab2, cn-newton or picard-duhamel");
    }
    s.read("dt", cfg.dt);
    s.read("final_time", cfg.scenario.final_time);
    s.read("nonlinear", cfg.scenario.nonlinear);
    s.read("stride", cfg.stride);
    s.read("newton_tol", cfg.newton_tol);
    s.read("newton_max_iter", cfg.newton_max_iter);
    s.read("picard_tol", cfg.picard_tol);
    s.read("picard_max_iter", cfg.picard_max_iter);
    s.read("panel", cfg.panel);
    s.read("tail_fraction", cfg.tail_fraction);
    s.read("tail_tolerance", cfg.tail_tolerance);
    s.read("advection", cfg.scenario.options.advection);
    s.read("dispersion", cfg.scenario.options.dispersion);
    s.read("hyperviscosity", cfg.scenario.options.hyperviscosity);
  });

  root.section("diagnostics", [&](Section& s) {
    DiagnosticsConfig& d = cfg.diagnostics;
    s.list("weights", [&](Section& w) {
      WeightRequest r;
      w.read("family", r.family);
      if (!kFamilies.count(r.family)) {
        fail(join(w.path(), "family"), "expected unit, polynomial, exponential or linear");
      }
      w.read("param", r.param);
      d.weights.push_back(r);
    });
    s.read("time_weights", d.time_weights);
    s.read("residuals", d.residuals);
    s.read("residual_tolerance", d.residual_tolerance);
    s.list("lyapunov", [&](Section& l) {
      LyapunovRequest r;
      l.read("m", r.m);
      l.read("d", r.d);
      d.lyapunov.push_back(r);
    });
    s.read("lyapunov_period", d.lyapunov_period);
    if (const json* v = s.raw("fit_window")) {
      if (!v->is_null()) {
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
            !(*v)[1].is_number()) {
          fail("diagnostics.fit_window", "expected null or [t_a, t_b]");
        }
        d.fit_window = std::make_pair((*v)[0].get<double>(), (*v)[1].get<double>());
      }
    }
    s.list("smoothing", [&](Section& m) {
      SmoothingRequest r;
      m.read("norm", r.norm);
      if (!kSmoothing.count(r.norm)) {
        fail(join(m.path(), "norm"), "expected h1, h1-weighted or hs-exponential");
      }
      m.read("m", r.m);
      m.read("b", r.b);
      m.read("s", r.s);
      m.read("mu", r.mu);
      m.read("t_min", r.t_min);
      d.smoothing.push_back(r);
    });
    s.read("inequalities", d.inequalities);
    s.read("inequality_b", d.inequality_b);
    s.read("corpus_size", d.corpus_size);
    s.read("seed", d.seed, 0);
    s.read("abscissa_b", d.abscissa_b);
    s.read("leading_eigenvalue", d.leading_eigenvalue);
    s.read("levels", d.levels);
  });

  root.section("sweep", [&](Section& s) {
    s.read("max_runs", cfg.sweep.max_runs);
    if (const json* v = s.raw("parameters")) {
      if (!v->is_object()) fail("sweep.parameters", "expected an object");
      for (auto it = v->begin(); it != v->end(); ++it) {
        const std::string field = "sweep.parameters." + it.key();
        const auto& names = sweep_parameter_names();
        if (std::find(names.begin(), names.end(), it.key()) == names.end()) {
          fail(field, "cannot be swept");
        }
        if (!it->is_array()) fail(field, "expected an array of numbers");
        std::vector<double> values;
        for (const json& x : *it) {
          if (!x.is_number()) fail(field, "expected an array of numbers");
          values.push_back(x.get<double>());
        }
        cfg.sweep.parameters[it.key()] = values;
      }
    }
  });

  root.section("output", [&](Section& s) { s.read("dir", cfg.output_dir); });
  root.finish();

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigParseError("<file>", "cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

void validate(const ExperimentConfig& cfg) {
  const Scenario& s = cfg.scenario;
  if (!(s.length > 0.0)) fail("grid.length", "must be positive");
  if (cfg.points < 8) fail("grid.points", "must be at least 8");

  const DampingSpec& d = s.damping;
  if (d.kind != "none" && !(d.a0 > 0.0)) fail("damping.a0", "must be positive");
  if (d.kind == "step" || d.kind == "smooth") {
    if (!(d.x0 > 0.0)) fail("damping.x0", "must be positive");
    if (!(d.x0 < s.length)) fail("damping.x0", "must be less than grid.length");
  }
  if (d.kind == "smooth") {
    if (!(d.ramp_width > 0.0)) fail("damping.ramp_width", "must be positive");
    if (!(d.x0 + d.ramp_width < s.length)) {
      fail("damping.ramp_width", "x0 + ramp_width must be less than grid.length");
    }
  }

  const InitialDatum& u0 = s.datum;
  if (u0.tag == "samples") {
    if (u0.samples.size() != cfg.points) {
      fail("initial.samples", "needs one value per grid point");
    }
  } else if (u0.tag != "zero" && !(u0.width > 0.0)) {
    fail("initial.width", "must be positive");
  }

  if (!(cfg.dt > 0.0)) fail("solver.dt", "must be positive");
  if (!(s.final_time > 0.0)) fail("solver.final_time", "must be positive");
  const double ratio = s.final_time / cfg.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    fail("solver.final_time", "must be a multiple of solver.dt");
  }
  if (cfg.stride < 1) fail("solver.stride", "must be at least 1");
  if (!(s.options.hyperviscosity >= 0.0)) {
    fail("solver.hyperviscosity", "must be nonnegative");
  }
  try {
    cfg.solver_config().validate();
  } catch (const ConfigError& e) {
    fail("solver", e.what());
  }

  const DiagnosticsConfig& g = cfg.diagnostics;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    const WeightRequest& w = g.weights[i];
    const std::string f = "diagnostics.weights[" + std::to_string(i) + "].param";
    if (w.family == "polynomial") {
      if (w.param != std::round(w.param) || w.param < 0 || w.param > 4) {
        fail(f, "polynomial order m must be an integer in 0..4");
      }
    }
    if (w.family == "exponential") {
      if (!(w.param > 0.0)) fail(f, "exponential rate b must be positive");
      if (2.0 * w.param * s.length > 600.0) {
        fail(f, "e^{2bL} overflows for this grid.length");
      }
    }
  }
  for (const std::string& tw : g.time_weights) {
    try {
      time_weight_from_string(tw);
    } catch (const ConfigError&) {
      fail("diagnostics.time_weights", "unknown time weight '" + tw + "'");
    }
  }
  if (!(g.residual_tolerance > 0.0)) {
    fail("diagnostics.residual_tolerance", "must be positive");
  }
  for (std::size_t i = 0; i < g.lyapunov.size(); ++i) {
    const LyapunovRequest& l = g.lyapunov[i];
    const std::string f = "diagnostics.lyapunov[" + std::to_string(i) + "]";
    if (l.m < 1 || l.m > 4) fail(f + ".m", "must lie in 1..4");
    if (!l.d.empty() && l.d.size() != static_cast<std::size_t>(l.m)) {
      fail(f + ".d", "needs exactly m coefficients");
    }
    for (double c : l.d) {
      if (!(c > 0.0)) fail(f + ".d", "coefficients must be positive");
    }
  }
  if (!(g.lyapunov_period > 0.0)) fail("diagnostics.lyapunov_period", "must be positive");
  if (g.fit_window && !(g.fit_window->first < g.fit_window->second)) {
    fail("diagnostics.fit_window", "needs t_a < t_b");
  }
  for (std::size_t i = 0; i < g.smoothing.size(); ++i) {
    const SmoothingRequest& r = g.smoothing[i];
    const std::string f = "diagnostics.smoothing[" + std::to_string(i) + "]";
    if (r.norm == "h1-weighted" && (r.m < 0 || r.m > 4)) fail(f + ".m", "must lie in 0..4");
    if (r.norm == "hs-exponential") {
      if (!(r.b > 0.0)) fail(f + ".b", "must be positive");
      if (r.s < 0 || r.s > 4) fail(f + ".s", "must lie in 0..4");
    }
    if (!(r.mu >= 0.0)) fail(f + ".mu", "must be nonnegative");
    if (r.t_min < 0.0 || r.t_min >= s.final_time) fail(f + ".t_min", "must lie in [0, final_time)");
  }
  if (!(g.inequality_b > 0.0)) fail("diagnostics.inequality_b", "must be positive");
  for (double b : g.abscissa_b) {
    if (!(b > 0.0)) fail("diagnostics.abscissa_b", "rates must be positive");
  }
  if (g.levels < 3) fail("diagnostics.levels", "must be at least 3");
  if (cfg.sweep.max_runs < 1) fail("sweep.max_runs", "must be at least 1");
}

ordered_json to_json(const ExperimentConfig& cfg) {
  const Scenario& s = cfg.scenario;
  ordered_json j;
  j["name"] = cfg.name;
  j["grid"] = {{"length", s.length}, {"points", cfg.points}};
  j["damping"] = {{"kind", s.damping.kind},
                  {"a0", s.damping.a0},
                  {"x0", s.damping.x0},
                  {"ramp_width", s.damping.ramp_width}};
  ordered_json init = {{"tag", s.datum.tag},
                       {"amplitude", s.datum.amplitude},
                       {"center", s.datum.center},
                       {"width", s.datum.width}};
  if (s.datum.tag == "samples") init["samples"] = s.datum.samples;
  j["initial"] = init;
  j["solver"] = {{"scheme", to_string(cfg.scheme)},
                 {"dt", cfg.dt},
                 {"final_time", s.final_time},
                 {"nonlinear", s.nonlinear},
                 {"stride", cfg.stride},
                 {"newton_tol", cfg.newton_tol},
                 {"newton_max_iter", cfg.newton_max_iter},
                 {"picard_tol", cfg.picard_tol},
                 {"picard_max_iter", cfg.picard_max_iter},
                 {"panel", cfg.panel},
                 {"tail_fraction", cfg.tail_fraction},
                 {"tail_tolerance", cfg.tail_tolerance},
                 {"advection", s.options.advection},
                 {"dispersion", s.options.dispersion},
                 {"hyperviscosity", s.options.hyperviscosity}};

  const DiagnosticsConfig& g = cfg.diagnostics;
  ordered_json diag;
  diag["weights"] = ordered_json::array();
  for (const auto& w : g.weights) {
    diag["weights"].push_back({{"family", w.family}, {"param", w.param}});
  }
  diag["time_weights"] = g.time_weights;
  diag["residuals"] = g.residuals;
  diag["residual_tolerance"] = g.residual_tolerance;
  diag["lyapunov"] = ordered_json::array();
  for (const auto& l : g.lyapunov) {
    diag["lyapunov"].push_back({{"m", l.m}, {"d", l.d}});
  }
  diag["lyapunov_period"] = g.lyapunov_period;
  diag["fit_window"] = g.fit_window
                           ? ordered_json::array({g.fit_window->first, g.fit_window->second})
                           : ordered_json(nullptr);
  diag["smoothing"] = ordered_json::array();
  for (const auto& r : g.smoothing) {
    diag["smoothing"].push_back({{"norm", r.norm},
                                 {"m", r.m},
                                 {"b", r.b},
                                 {"s", r.s},
                                 {"mu", r.mu},
                                 {"t_min", r.t_min}});
  }
  diag["inequalities"] = g.inequalities;
  diag["inequality_b"] = g.inequality_b;
  diag["corpus_size"] = g.corpus_size;
  diag["seed"] = g.seed;
  diag["abscissa_b"] = g.abscissa_b;
  diag["leading_eigenvalue"] = g.leading_eigenvalue;
  diag["levels"] = g.levels;
  j["diagnostics"] = diag;

  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : cfg.sweep.parameters) params[k] = v;
  j["sweep"] = {{"parameters", params}, {"max_runs", cfg.sweep.max_runs}};
  j["output"] = {{"dir", cfg.output_dir}};
  return j;
}

const std::vector<std::string>& sweep_parameter_names() {
  static const std::vector<std::string> names{"a0", "x0", "b", "m", "amplitude", "width"};
  return names;
}

ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& name,
                                double value) {
  ExperimentConfig c = cfg;
  if (name == "a0") {
    c.scenario.damping.a0 = value;
  } else if (name == "x0") {
    c.scenario.damping.x0 = value;
  } else if (name == "amplitude") {
    c.scenario.datum.amplitude = value;
  } else if (name == "width") {
    c.scenario.datum.width = value;
  } else if (name == "b") {
    bool found = false;
    for (auto& w : c.diagnostics.weights) {
      if (w.family == "exponential") {
        w.param = value;
        found = true;
      }
    }
    if (!found) c.diagnostics.weights.push_back({"exponential", value});
    c.diagnostics.abscissa_b = {value};
  } else if (name == "m") {
    if (value != std::round(value)) fail("sweep.parameters.m", "values must be integers");
    c.diagnostics.lyapunov = {{static_cast<int>(value), {}}};
  } else {
    fail("sweep.parameters." + name, "cannot be swept");
  }
  validate(c);
  return c;
}

}  // namespace dkdv::experiments
