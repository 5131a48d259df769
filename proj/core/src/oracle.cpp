#include "dkdv/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dkdv/error.hpp"

namespace dkdv {

static_assert(std::endian::native == std::endian::little,
              "reference cache layout assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw ConfigError("reference file is truncated");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::size_t nesting(std::size_t coarse, std::size_t fine) {
  if (coarse < 3 || fine < coarse || (fine - 1) % (coarse - 1) != 0) {
    throw ConfigError("grid with " + std::to_string(coarse) +
                      " points is not nested in one with " + std::to_string(fine));
  }
  return (fine - 1) / (coarse - 1);
}

}  // namespace

State solve_scenario(const Scenario& s, Resolution r, Scheme scheme) {
  const Grid grid = build_grid(s.length, r.points);
  const OperatorSet ops = build_operators(grid, make_damping(grid, s.damping), s.options);
  const SampledDatum u0 = sample_initial(grid, s.datum);
  SolverConfig cfg;
  cfg.dt = r.dt;
  cfg.final_time = s.final_time;
  cfg.scheme = scheme;
  cfg.nonlinear = s.nonlinear;
  cfg.stride = cfg.steps();
  Trajectory tr = solve(u0.state, ops, cfg);
  return tr.states.back();
}

std::filesystem::path reference_cache_path(const std::filesystem::path& dir,
                                           const Scenario& s, Resolution r) {
  std::ostringstream key;
  key << canonical_string(s) << ";N=" << r.points << ";dt=" << std::hexfloat << r.dt;
  return dir / (hex(scenario_hash(s)) + "-" + hex(fnv1a(key.str())) + ".ref");
}

void write_reference_file(const std::filesystem::path& path, const ReferenceFile& f) {
  if (f.values.size() != f.points) {
    throw ConfigError("reference values do not match the point count");
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    put(os, f.hash);
    put(os, f.points);
    put(os, f.length);
    put(os, f.dt);
    put(os, f.final_time);
    for (double v : f.values) put(os, v);
    if (!os) throw ConfigError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

ReferenceFile read_reference_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  ReferenceFile f;
  f.hash = get<std::uint64_t>(is);
  f.points = get<std::uint64_t>(is);
  f.length = get<double>(is);
  f.dt = get<double>(is);
  f.final_time = get<double>(is);
  f.values.resize(f.points);
  for (double& v : f.values) v = get<double>(is);
  return f;
}

ReferenceResult reference_solve(const Scenario& s, const ReferenceOptions& opts) {
  const Resolution r = opts.resolution;
  if (r.points < 8001) {
    throw ConfigError("reference resolution needs at least 8001 points");
  }
  if (!(r.dt > 0.0) || r.dt > 2e-4) {
    throw ConfigError("reference time step must be in (0, 2e-4]");
  }
  ReferenceResult out;
  const std::uint64_t hash = scenario_hash(s);
  if (!opts.cache_dir.empty()) {
    out.cache_file = reference_cache_path(opts.cache_dir, s, r);
    if (std::filesystem::exists(out.cache_file)) {
      try {
        ReferenceFile f = read_reference_file(out.cache_file);
        if (f.hash == hash && f.points == r.points && f.length == s.length &&
            f.dt == r.dt && f.final_time == s.final_time) {
          out.state.t = s.final_time;
          out.state.u = std::move(f.values);
          out.from_cache = true;
          return out;
        }
      } catch (const ConfigError&) {
        // unreadable entries are recomputed
      }
    }
  }
  out.state = solve_scenario(s, r, Scheme::CnNewton);
  if (!opts.cache_dir.empty()) {
    std::filesystem::create_directories(opts.cache_dir);
    write_reference_file(out.cache_file,
                         {hash, r.points, s.length, r.dt, s.final_time, out.state.u});
  }
  return out;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size() || h.size() < 2) {
    throw ConfigError("order fit needs at least two matching samples");
  }
  const double n = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return 0.0;
  return (n * sxy - sx * sy) / den;
}

ConvergenceStudy convergence_study(const Scenario& s,
                                   const std::vector<Resolution>& levels,
                                   Scheme scheme) {
  if (levels.size() < 3) throw ConfigError("a convergence study needs >= 3 levels");
  ConvergenceStudy st;
  st.levels = levels;
  const Resolution finest = levels.back();
  for (const Resolution& r : levels) nesting(r.points, finest.points);

  const State ref = solve_scenario(s, finest, scheme);
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    const State u = solve_scenario(s, levels[l], scheme);
    const std::size_t stride = nesting(levels[l].points, finest.points);
    double err = 0.0;
    for (std::size_t i = 0; i < u.u.size(); ++i) {
      err = std::max(err, std::abs(u.u[i] - ref.u[i * stride]));
    }
    st.errors.push_back(err);
  }

  bool ok = true;
  for (std::size_t i = 0; i < st.errors.size(); ++i) {
    if (!(st.errors[i] > 0.0)) ok = false;
    if (i > 0 && !(st.errors[i] < st.errors[i - 1])) ok = false;
  }
  if (!ok) {
    st.invalid = true;
    st.note = "errors are not positive and strictly decreasing";
    return st;
  }
  std::vector<double> h;
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) h.push_back(levels[l].dt);
  st.order = fit_order(h, st.errors);
  return st;
}

ConvergenceStudy convergence_order(const Scenario& s, std::size_t levels,
                                   Resolution coarsest, Scheme scheme) {
  if (levels < 3) throw ConfigError("a convergence study needs >= 3 levels");
  std::vector<Resolution> rs;
  Resolution r = coarsest;
  for (std::size_t l = 0; l < levels; ++l) {
    rs.push_back(r);
    r.points = 2 * r.points - 1;
    r.dt *= 0.5;
  }
  return convergence_study(s, rs, scheme);
}

OperatorOptions ode_limit_options() {
  OperatorOptions o;
  o.advection = false;
  o.dispersion = false;
  o.hyperviscosity = 0.0;
  return o;
}

}  // namespace dkdv
