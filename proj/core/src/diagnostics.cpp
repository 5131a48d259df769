#include "dkdv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "dkdv/error.hpp"
#include "dkdv/operators.hpp"
#include "dkdv/quadrature.hpp"

namespace dkdv {

namespace {

void check_state(const Grid& grid, const State& u) {
  if (u.u.size() != grid.size()) {
    throw ConfigError("state does not match the grid");
  }
}

double weighted_sq(const Grid& grid, std::span<const double> v,
                   std::span<const double> weight) {
  std::vector<double> f(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) f[i] = weight[i] * v[i] * v[i];
  return trapezoid(grid, f);
}

std::vector<double> poly_power(const Grid& grid, int p) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(grid.x(i) + 1.0, p);
  return w;
}

std::vector<double> exp_weight(const Grid& grid, double b) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(2.0 * b * grid.x(i));
  return w;
}

}  // namespace

// ---------------------------------------------------------------- norms

double weighted_norm_sq(const Grid& grid, const State& u, const WeightSpec& w) {
  check_state(grid, u);
  return quadrature(grid, [&] {
    std::vector<double> sq(u.u.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = u.u[i] * u.u[i];
    return sq;
  }(), w);
}

double weighted_h1_norm_sq(const Grid& grid, const State& u,
                           WeightFamily family, double param) {
  check_state(grid, u);
  const std::vector<double> ux = node_derivative(u.u, grid.dx());
  switch (family) {
    case WeightFamily::Unit:
      return weighted_sq(grid, u.u, std::vector<double>(grid.size(), 1.0)) +
             weighted_sq(grid, ux, std::vector<double>(grid.size(), 1.0));
    case WeightFamily::Polynomial: {
      const int m = static_cast<int>(param);
      if (m < 0 || m != param) {
        throw ConfigError("polynomial order must be a nonnegative integer");
      }
      return weighted_sq(grid, u.u, poly_power(grid, m)) +
             weighted_sq(grid, ux, poly_power(grid, std::max(m - 1, 0)));
    }
    case WeightFamily::Exponential: {
      if (!(param > 0.0)) throw ConfigError("exponential rate b must be positive");
      const std::vector<double> w = exp_weight(grid, param);
      return weighted_sq(grid, u.u, w) + weighted_sq(grid, ux, w);
    }
    case WeightFamily::Custom:
      break;
  }
  throw ConfigError("weighted H1 norm needs the unit, polynomial or exponential family");
}

double exponential_hs_norm_sq(const Grid& grid, const State& u, double b,
                              int s) {
  check_state(grid, u);
  if (!(b > 0.0)) throw ConfigError("exponential rate b must be positive");
  if (s < 0 || s > 4) throw ConfigError("derivative order s must lie in 0..4");
  const std::vector<double> w = exp_weight(grid, b);
  std::vector<double> d = u.u;
  double total = weighted_sq(grid, d, w);
  for (int i = 1; i <= s; ++i) {
    d = node_derivative(d, grid.dx());
    total += weighted_sq(grid, d, w);
  }
  return total;
}

// ------------------------------------------------------------ Lyapunov

std::vector<double> default_lyapunov_coefficients(int m) {
  return std::vector<double>(static_cast<std::size_t>(std::max(m, 0)), 10.0);
}

double lyapunov(const Grid& grid, const State& u, int m,
                const std::vector<double>& d) {
  check_state(grid, u);
  if (m < 0) throw ConfigError("Lyapunov order must be nonnegative");
  if (d.size() != static_cast<std::size_t>(m)) {
    std::ostringstream os;
    os << "V_" << m << " needs " << m << " coefficients, got " << d.size();
    throw ConfigError(os.str());
  }
  for (double c : d) {
    if (!(c > 0.0)) throw ConfigError("Lyapunov coefficients must be positive");
  }
  std::vector<double> sq(u.u.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = u.u[i] * u.u[i];
  double v = 0.5 * trapezoid(grid, sq);
  for (int j = 1; j <= m; ++j) {
    v = 0.5 * weighted_sq(grid, u.u, poly_power(grid, j)) + d[j - 1] * v;
  }
  return v;
}

LyapunovSeries lyapunov_series(const Trajectory& traj, int m,
                               const std::vector<double>& d) {
  LyapunovSeries out;
  out.m = m;
  out.d = d;
  for (const State& s : traj.states) {
    out.times.push_back(s.t);
    out.values.push_back(lyapunov(traj.grid, s, m, d));
  }
  return out;
}

LyapunovCheck lyapunov_decrease(const Trajectory& traj, int m,
                                std::vector<double> d, double period,
                                int max_doublings) {
  if (!(period > 0.0)) throw ConfigError("sampling period must be positive");
  if (m < 1) throw ConfigError("Lyapunov decrease check needs m >= 1");
  std::vector<const State*> samples;
  const double tol = 1e-9 * period;
  for (const State& s : traj.states) {
    const double k = std::round(s.t / period);
    if (std::abs(s.t - k * period) < tol) samples.push_back(&s);
  }
  if (samples.size() < 2) {
    throw InsufficientData("fewer than two stored states on the sampling lattice");
  }

  LyapunovCheck check;
  for (int attempt = 0; attempt <= max_doublings; ++attempt) {
    LyapunovSeries series;
    series.m = m;
    series.d = d;
    bool ok = true;
    for (const State* s : samples) {
      series.times.push_back(s->t);
      series.values.push_back(lyapunov(traj.grid, *s, m, d));
      const std::size_t n = series.values.size();
      if (n > 1 && series.values[n - 1] > series.values[n - 2]) ok = false;
    }
    check.series = std::move(series);
    check.doublings = attempt;
    check.nonincreasing = ok;
    if (ok) return check;
    if (attempt < max_doublings) d[m - 1] *= 2.0;
  }
  std::ostringstream os;
  os << "increase d_" << m - 1;
  check.flag = os.str();
  return check;
}

// ------------------------------------------------------ energy identity

std::string to_string(TimeWeight tw) {
  switch (tw) {
    case TimeWeight::None: return "none";
    case TimeWeight::Remaining: return "T-t";
    case TimeWeight::Elapsed: return "t";
  }
  return "none";
}

TimeWeight time_weight_from_string(const std::string& name) {
  if (name == "none") return TimeWeight::None;
  if (name == "T-t") return TimeWeight::Remaining;
  if (name == "t") return TimeWeight::Elapsed;
  throw ConfigError("unknown time weight '" + name + "'");
}

namespace {

WeightSeries series_from_states(const Trajectory& traj, const WeightSpec& w) {
  if (traj.stride != 1) {
    throw InsufficientResolution(
        "weight '" + w.label +
        "' was not monitored during the solve and states are stored every " +
        std::to_string(traj.stride) + " steps; the residual needs stride 1");
  }
  WeightSeries s;
  s.weight = w;
  for (const State& st : traj.states) {
    const std::vector<double> ux = node_derivative(st.u, traj.grid.dx());
    append_weight_terms(s, traj.grid, traj.damping, st.u, ux);
  }
  return s;
}

bool same_weight(const WeightSpec& a, const WeightSpec& b) {
  return a.label == b.label && a.phi == b.phi && a.dphi == b.dphi &&
         a.d3phi == b.d3phi;
}

}  // namespace

IdentityResidual identity_residual(const Trajectory& traj, const WeightSpec& w,
                                   TimeWeight time_weight, double t1,
                                   double t2) {
  if (w.phi.size() != traj.grid.size()) {
    throw ConfigError("weight was sampled on a different grid");
  }
  if (!(t1 < t2)) throw ConfigError("identity residual needs t1 < t2");
  const std::size_t k1 = traj.lattice_index(t1);
  const std::size_t k2 = traj.lattice_index(t2);

  const WeightSeries* found = traj.find_weight(w.label);
  WeightSeries local;
  if (found == nullptr || !same_weight(found->weight, w)) {
    local = series_from_states(traj, w);
    found = &local;
  }
  const WeightSeries& s = *found;

  const double dt = traj.dt;
  const double ta = traj.step_times[k1];
  const double tb = traj.step_times[k2];
  auto psi = [&](double t) {
    switch (time_weight) {
      case TimeWeight::None: return 1.0;
      case TimeWeight::Remaining: return tb - t;
      case TimeWeight::Elapsed: return t;
    }
    return 1.0;
  };
  const double dpsi = time_weight == TimeWeight::None        ? 0.0
                      : time_weight == TimeWeight::Remaining ? -1.0
                                                             : 1.0;

  const std::size_t n = traj.step_times.size();
  std::vector<double> grad(n), adv(n), disp(n), cub(n), damp(n), trace(n), half(n);
  for (std::size_t k = k1; k <= k2; ++k) {
    const double p = psi(traj.step_times[k]);
    grad[k] = p * s.gradient[k];
    adv[k] = p * s.advected[k];
    disp[k] = p * s.dispersed[k];
    cub[k] = p * s.cubic[k];
    damp[k] = p * s.damped[k];
    trace[k] = p * traj.traces[k] * traj.traces[k];
    half[k] = s.half_mass[k];
  }

  IdentityResidual r;
  r.weight = w.label;
  r.family = w.family;
  r.param = w.family == WeightFamily::Exponential ? w.b : w.m;
  r.time_weight = time_weight;
  r.t1 = ta;
  r.t2 = tb;
  r.terms = {
      {"mass_end", psi(tb) * s.half_mass[k2]},
      {"mass_start", -psi(ta) * s.half_mass[k1]},
      {"mass_time", -dpsi * trapezoid_series(half, dt, k1, k2)},
      {"gradient", traj.dispersion ? 1.5 * trapezoid_series(grad, dt, k1, k2) : 0.0},
      {"advection", traj.advection ? -0.5 * trapezoid_series(adv, dt, k1, k2) : 0.0},
      {"dispersion", traj.dispersion ? -0.5 * trapezoid_series(disp, dt, k1, k2) : 0.0},
      {"cubic", traj.nonlinear ? -trapezoid_series(cub, dt, k1, k2) / 3.0 : 0.0},
      {"damping", trapezoid_series(damp, dt, k1, k2)},
      {"trace", traj.dispersion
                    ? 0.5 * w.phi_at_origin * trapezoid_series(trace, dt, k1, k2)
                    : 0.0},
  };
  for (const auto& [name, value] : r.terms) {
    r.residual += value;
    r.scale = std::max(r.scale, std::abs(value));
  }
  r.relative = r.scale > 0.0 ? r.residual / r.scale : 0.0;
  if (r.scale == 0.0) r.residual = 0.0;
  return r;
}

// ---------------------------------------------------------- decay fits

DecayFit fit_decay(const std::vector<double>& times,
                   const std::vector<double>& values, double t_a, double t_b,
                   const std::string& norm) {
  if (times.size() != values.size()) {
    throw ConfigError("times and values differ in length");
  }
  if (!(t_a < t_b)) throw ConfigError("fit window needs t_a < t_b");
  DecayFit fit;
  fit.norm = norm;
  fit.t_a = t_a;
  fit.t_b = t_b;
  if (values.empty()) throw InsufficientData("empty series");

  const double floor = 1e-12 * std::abs(values.front());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_a || times[i] > t_b) continue;
    if (!(values[i] > floor) || !(values[i] > 0.0)) {
      fit.floor_reached = true;
      continue;
    }
    xs.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  fit.samples = xs.size();
  if (xs.size() < 10) {
    std::ostringstream os;
    os << "decay fit needs at least 10 usable samples in [" << t_a << ", "
       << t_b << "], found " << xs.size();
    throw InsufficientData(os.str());
  }

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  fit.rate = -slope;
  fit.prefactor = std::exp(intercept);

  // a series constant up to rounding has no meaningful R^2
  const double spread = std::sqrt(syy / n);
  if (spread <= 1e-14 * std::max(1.0, std::abs(my))) {
    fit.constant_series = true;
    fit.rate = 0.0;
    fit.prefactor = std::exp(my);
    fit.r_squared = 0.0;
    return fit;
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss_res += e * e;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

DecayFit fit_decay(const std::vector<double>& times,
                   const std::vector<double>& values, const std::string& norm) {
  if (times.empty()) throw InsufficientData("empty series");
  const double t0 = times.front();
  const double span = times.back() - t0;
  return fit_decay(times, values, t0 + 0.2 * span, t0 + 0.9 * span, norm);
}

std::vector<double> l2_norm_series(const Trajectory& traj) {
  std::vector<double> out(traj.energy.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::sqrt(2.0 * traj.energy[k]);
  return out;
}

std::vector<double> weighted_norm_series(const Trajectory& traj,
                                         const std::string& label) {
  const WeightSeries* s = traj.find_weight(label);
  if (s == nullptr) {
    throw ConfigError("weight '" + label + "' was not monitored during the solve");
  }
  std::vector<double> out(s->half_mass.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::sqrt(2.0 * s->half_mass[k]);
  return out;
}

// ------------------------------------------------------------ smoothing

double smoothing_statistic(const Trajectory& traj, const SmoothingSpec& spec,
                           double mu, double t_min) {
  if (traj.states.empty()) throw InsufficientData("empty trajectory");
  if (!(mu >= 0.0)) throw ConfigError("smoothing rate mu must be nonnegative");
  if (!(t_min > 0.0) || !(t_min < traj.final_time())) {
    throw ConfigError("smoothing statistic needs 0 < t_min < final time");
  }
  const Grid& g = traj.grid;
  const State& u0 = traj.states.front();
  if (u0.t != traj.step_times.front()) {
    throw InsufficientData("the initial state is not stored");
  }

  double denom_sq = 0.0;
  switch (spec.norm) {
    case SmoothingNorm::H1:
      denom_sq = weighted_norm_sq(g, u0, polynomial_weight(g, 1));
      break;
    case SmoothingNorm::H1Weighted:
      denom_sq = weighted_norm_sq(g, u0, polynomial_weight(g, spec.m));
      break;
    case SmoothingNorm::HsExponential:
      denom_sq = weighted_norm_sq(g, u0, exponential_weight(g, spec.b));
      break;
  }
  if (!(denom_sq > 0.0)) {
    throw UndefinedStatistic("initial weighted norm is zero");
  }
  const double denom = std::sqrt(denom_sq);
  const double half_s =
      spec.norm == SmoothingNorm::HsExponential ? 0.5 * spec.s : 0.5;
  const double tol = 1e-12 * std::max(1.0, t_min);

  double sup = 0.0;
  if (spec.norm == SmoothingNorm::H1) {
    for (std::size_t k = 0; k < traj.step_times.size(); ++k) {
      const double t = traj.step_times[k];
      if (t < t_min - tol) continue;
      const double v = std::pow(t, half_s) * std::exp(mu * t) *
                       std::sqrt(traj.gradient_sq[k]) / denom;
      sup = std::max(sup, v);
    }
    return sup;
  }
  for (const State& s : traj.states) {
    if (s.t < t_min - tol) continue;
    const double norm_sq =
        spec.norm == SmoothingNorm::H1Weighted
            ? weighted_h1_norm_sq(g, s, WeightFamily::Polynomial, spec.m)
            : exponential_hs_norm_sq(g, s, spec.b, spec.s);
    sup = std::max(sup, std::pow(s.t, half_s) * std::exp(mu * s.t) *
                            std::sqrt(norm_sq) / denom);
  }
  return sup;
}

// ---------------------------------------------------------- inequalities

double young_constant(double eps) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  return 0.75 * std::pow(std::numbers::sqrt2, 4.0 / 3.0) *
         std::pow(4.0 * eps, -1.0 / 3.0);
}

namespace {

InequalityCheck make_check(std::string name, double lhs, double rhs) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.pass = lhs <= kInequalitySlack * rhs;
  return c;
}

}  // namespace

InequalityReport check_inequalities(const Grid& grid, const State& u,
                                    double b) {
  check_state(grid, u);
  if (!(b > 0.0)) throw ConfigError("exponential rate b must be positive");
  const std::size_t n = grid.size();
  const std::vector<double>& v = u.u;
  const std::vector<double> ux = node_derivative(v, grid.dx());
  const std::vector<double> one(n, 1.0);
  const std::vector<double> ew = exp_weight(grid, b);
  const std::vector<double> xp1 = poly_power(grid, 1);
  const std::vector<double> xp2 = poly_power(grid, 2);

  const double l2 = std::sqrt(weighted_sq(grid, v, one));
  const double dx_l2 = std::sqrt(weighted_sq(grid, ux, one));
  double sup = 0.0, sup_weighted = 0.0;
  std::vector<double> cube(n), cube_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(v[i]);
    sup = std::max(sup, a);
    sup_weighted = std::max(sup_weighted, v[i] * v[i] * ew[i]);
    cube[i] = a * a * a;
    cube_w[i] = xp1[i] * cube[i];
  }
  const double cubic = trapezoid(grid, cube);
  const double l2b_sq = weighted_sq(grid, v, ew);
  const double grad_b_sq = weighted_sq(grid, ux, ew);
  const double h1b = std::sqrt(l2b_sq + grad_b_sq);

  InequalityReport r;
  r.checks.push_back(
      make_check("moser", sup, std::numbers::sqrt2 * std::sqrt(dx_l2 * l2)));
  r.checks.push_back(
      make_check("weighted_sup", sup_weighted, (2.0 + 2.0 * b) * std::sqrt(l2b_sq) * h1b));
  r.checks.push_back(
      make_check("weighted_poincare", l2b_sq, grad_b_sq / (b * b)));
  r.checks.push_back(make_check(
      "weighted_cubic", 2.0 / 3.0 * trapezoid(grid, cube_w),
      2.0 * std::numbers::sqrt2 / 3.0 * std::sqrt(dx_l2) * std::pow(l2, 1.5) *
          std::sqrt(weighted_sq(grid, v, xp2))));
  r.checks.push_back(make_check("cubic_sup", cubic, sup * l2 * l2));
  r.checks.push_back(make_check(
      "cubic_moser", cubic, std::numbers::sqrt2 * std::sqrt(dx_l2) * std::pow(l2, 2.5)));
  for (double eps : {0.5, 1.0}) {
    const double p = std::pow(l2, 10.0 / 3.0);
    std::ostringstream name;
    name << "cubic_young_eps" << eps;
    r.checks.push_back(make_check(name.str(), cubic,
                                  eps * dx_l2 * dx_l2 + young_constant(eps) * p));
    r.c_eps.emplace_back(eps, p > 0.0 ? std::max(0.0, (cubic - eps * dx_l2 * dx_l2) / p) : 0.0);
  }
  for (const auto& c : r.checks) r.all_pass = r.all_pass && c.pass;
  return r;
}

std::vector<State> random_smooth_states(const Grid& grid, std::size_t count,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bumps(1, 4);
  std::uniform_real_distribution<double> centre(1.0, std::min(15.0, 0.4 * grid.length()));
  std::uniform_real_distribution<double> width(0.7, 2.5);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  std::uniform_real_distribution<double> ramp(0.5, 2.0);
  std::vector<State> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const int k = bumps(rng);
    std::vector<double> c(k), w(k), a(k);
    for (int j = 0; j < k; ++j) {
      c[j] = centre(rng);
      w[j] = width(rng);
      a[j] = amp(rng);
    }
    const double l = ramp(rng);
    State st;
    st.u.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double x = grid.x(i);
      double v = 0.0;
      for (int j = 0; j < k; ++j) {
        const double z = (x - c[j]) / w[j];
        v += a[j] * std::exp(-z * z);
      }
      st.u[i] = std::tanh(x / l) * v;
    }
    out.push_back(std::move(st));
  }
  return out;
}

// --------------------------------------------------------- other checks

double observability_ratio(const Trajectory& traj, double t1, double t2) {
  if (!(t1 < t2)) throw ConfigError("observability ratio needs t1 < t2");
  const std::size_t k1 = traj.lattice_index(t1);
  const std::size_t k2 = traj.lattice_index(t2);
  std::vector<double> mass(traj.energy.size()), trace(traj.traces.size());
  for (std::size_t k = 0; k < mass.size(); ++k) {
    mass[k] = 2.0 * traj.energy[k];
    trace[k] = traj.traces[k] * traj.traces[k];
  }
  const double num = trapezoid_series(mass, traj.dt, k1, k2);
  const double den = 0.5 * trapezoid_series(trace, traj.dt, k1, k2) +
                     trapezoid_series(traj.damping_dissipation, traj.dt, k1, k2);
  if (!(den > 0.0)) {
    throw UndefinedStatistic("observability ratio has a zero denominator");
  }
  return num / den;
}

std::vector<double> higher_derivative_norms(const Grid& grid, const State& u,
                                            double eps, int k_max, int m) {
  check_state(grid, u);
  if (m < 0) throw ConfigError("weight order m must be nonnegative");
  if (k_max < 1 || k_max > std::min(m, 4)) {
    std::ostringstream os;
    os << "k_max = " << k_max << " must lie in 1..min(m, 4) = " << std::min(m, 4);
    throw ConfigError(os.str());
  }
  if (eps < 4.0 * grid.dx() * (1.0 - 1e-12) || !(eps < grid.length())) {
    throw ConfigError("eps must satisfy 4 dx <= eps < L");
  }
  const std::size_t first = grid.first_node_at_or_after(eps);
  std::vector<double> out;
  std::vector<double> d = u.u;
  for (int k = 1; k <= k_max; ++k) {
    d = node_derivative(d, grid.dx());
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = std::pow(grid.x(i) + 1.0, m - k) * d[i] * d[i];
    }
    out.push_back(trapezoid_from(grid, f, first));
  }
  return out;
}

}  // namespace dkdv
