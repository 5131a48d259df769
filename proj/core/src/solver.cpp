#include "dkdv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dkdv/error.hpp"
#include "dkdv/quadrature.hpp"

namespace dkdv {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::ImexCnAb2: return "imex-cn-ab2";
    case Scheme::CnNewton: return "cn-newton";
    case Scheme::PicardDuhamel: return "picard-duhamel";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "imex-cn-ab2") return Scheme::ImexCnAb2;
  if (name == "cn-newton") return Scheme::CnNewton;
  if (name == "picard-duhamel") return Scheme::PicardDuhamel;
  throw ConfigError("unknown scheme '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !(final_time > 0.0) || !(dt < final_time)) {
    throw ConfigError("solver needs 0 < dt < final_time");
  }
  if (!(newton_tol > 0.0) || !(picard_tol > 0.0)) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (newton_max_iter < 1 || picard_max_iter < 1) {
    throw ConfigError("iteration caps must be at least 1");
  }
  if (stride < 1) throw ConfigError("output stride must be >= 1");
  if (!(panel > 0.0)) throw ConfigError("Picard panel length must be positive");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw ConfigError("tail fraction must lie in (0, 1)");
  }
  (void)steps();
}

std::size_t SolverConfig::steps() const {
  const double ratio = final_time / dt;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("final_time must be an integer multiple of dt");
  }
  return static_cast<std::size_t>(k);
}

const WeightSeries* Trajectory::find_weight(const std::string& label) const {
  for (const auto& w : weights) {
    if (w.weight.label == label) return &w;
  }
  return nullptr;
}

std::size_t Trajectory::lattice_index(double t) const {
  if (step_times.empty()) throw InsufficientData("empty trajectory");
  const double k = std::round(t / dt);
  if (k < 0 || k >= static_cast<double>(step_times.size()) ||
      std::abs(t - k * dt) > 1e-8 * std::max(1.0, std::abs(t))) {
    std::ostringstream os;
    os << "time " << t << " is not on the step lattice of this trajectory";
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(k);
}

double l2_norm(const Grid& grid, std::span<const double> nodes) {
  std::vector<double> sq(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) sq[i] = nodes[i] * nodes[i];
  return std::sqrt(trapezoid(grid, sq));
}

// ---------------------------------------------------------------- nonlinearity

std::vector<double> nonlinear_term(const OperatorSet& ops,
                                   std::span<const double> u) {
  const std::size_t n = u.size();
  std::vector<double> du = ops.d1 * u;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = u[i] * u[i];
  std::vector<double> dsq = ops.d1 * std::span<const double>(sq);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = -(u[i] * du[i] + dsq[i]) / 3.0;
  }
  return out;
}

std::vector<double> nonlinear_term_nodes(const OperatorSet& ops,
                                         std::span<const double> nodes) {
  return to_nodes(nonlinear_term(ops, to_interior(nodes)));
}

std::vector<double> nonlinear_term_advective(const OperatorSet& ops,
                                             std::span<const double> u) {
  std::vector<double> du = ops.d1 * u;
  for (std::size_t i = 0; i < du.size(); ++i) du[i] *= -u[i];
  return du;
}

BandedMatrix nonlinear_jacobian(const OperatorSet& ops,
                                std::span<const double> u) {
  // d/du of -(1/3)(diag(u) D1 u + D1 (u∘u))
  //   = -(1/3)(diag(D1 u) + diag(u) D1 + 2 D1 diag(u))
  const std::size_t n = u.size();
  const std::vector<double> du = ops.d1 * u;
  BandedMatrix j(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > 0 ? i - 1 : 0;
    const std::size_t hi = std::min(n - 1, i + 1);
    for (std::size_t c = lo; c <= hi; ++c) {
      double v = u[i] * ops.d1(i, c) + 2.0 * ops.d1(i, c) * u[c];
      if (c == i) v += du[i];
      j.at(i, c) = -v / 3.0;
    }
  }
  return j;
}

// ------------------------------------------------------------- linear CN map

namespace {

BandedMatrix shifted_generator(const OperatorSet& ops, double scale) {
  // I + scale * A
  return BandedMatrix::combine(1.0, BandedMatrix::identity(ops.size()), scale,
                               ops.generator);
}

double discrete_norm(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s * dx);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

CrankNicolsonMap::CrankNicolsonMap(const OperatorSet& ops, double dt)
    : dt_(dt),
      forward_(shifted_generator(ops, 0.5 * dt)),
      backward_(shifted_generator(ops, -0.5 * dt)) {}

std::vector<double> CrankNicolsonMap::apply(std::span<const double> u) const {
  std::vector<double> v = forward_ * u;
  backward_.solve_in_place(v);
  return v;
}

std::vector<double> CrankNicolsonMap::solve(std::span<const double> v) const {
  return backward_.solve(v);
}

std::vector<double> CrankNicolsonMap::explicit_part(
    std::span<const double> v) const {
  return forward_ * v;
}

// ------------------------------------------------------------------ steppers

ImexStepper::ImexStepper(const OperatorSet& ops, const SolverConfig& cfg)
    : ops_(ops), nonlinear_(cfg.nonlinear), map_(ops, cfg.dt) {}

State ImexStepper::step(const State& state) {
  const double dt = map_.dt();
  const std::vector<double> u = to_interior(state.u);
  std::vector<double> rhs = map_.explicit_part(u);
  std::vector<double> next;
  if (!nonlinear_) {
    next = map_.solve(rhs);
  } else {
    const std::vector<double> nu = nonlinear_term(ops_, u);
    if (!prev_) {
      // Heun-type start: explicit predictor, trapezoid corrector.
      std::vector<double> pred_rhs = rhs;
      for (std::size_t i = 0; i < u.size(); ++i) pred_rhs[i] += dt * nu[i];
      const std::vector<double> pred = map_.solve(pred_rhs);
      const std::vector<double> npred = nonlinear_term(ops_, pred);
      for (std::size_t i = 0; i < u.size(); ++i) {
        rhs[i] += 0.5 * dt * (nu[i] + npred[i]);
      }
    } else {
      const std::vector<double>& np = *prev_;
      for (std::size_t i = 0; i < u.size(); ++i) {
        rhs[i] += dt * (1.5 * nu[i] - 0.5 * np[i]);
      }
    }
    next = map_.solve(rhs);
    prev_ = nu;
  }
  const double t = state.t + dt;
  if (!all_finite(next)) throw BlowUp(t, "non-finite values in IMEX step");
  return State{t, to_nodes(next)};
}

CnNewtonStepper::CnNewtonStepper(const OperatorSet& ops,
                                 const SolverConfig& cfg)
    : ops_(ops),
      cfg_(cfg),
      map_(ops, cfg.dt),
      implicit_(shifted_generator(ops, -0.5 * cfg.dt)) {}

State CnNewtonStepper::step(const State& state) {
  const double dt = cfg_.dt;
  const double h = ops_.dx();
  const std::vector<double> u = to_interior(state.u);
  const double t = state.t + dt;
  if (!cfg_.nonlinear) {
    last_iterations_ = 1;
    std::vector<double> next = map_.apply(u);
    if (!all_finite(next)) throw BlowUp(t, "non-finite values in CN step");
    return State{t, to_nodes(next)};
  }

  const std::size_t n = u.size();
  const std::vector<double> nu = nonlinear_term(ops_, u);
  const std::vector<double> known = map_.explicit_part(u);

  // predictor: linear CN plus explicit Euler on the nonlinear term
  std::vector<double> v = known;
  for (std::size_t i = 0; i < n; ++i) v[i] += dt * nu[i];
  v = map_.solve(v);

  // nonlinear term at the midpoint (u + v) / 2, which keeps <N, mid> = 0
  std::vector<double> mid(n);
  for (int it = 1; it <= cfg_.newton_max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u[i] + v[i]);
    const std::vector<double> nm = nonlinear_term(ops_, mid);
    std::vector<double> residual = implicit_ * std::span<const double>(v);
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = known[i] + dt * nm[i] - residual[i];
    }
    BandedMatrix jac = nonlinear_jacobian(ops_, mid);
    jac = BandedMatrix::combine(1.0, implicit_, -0.5 * dt, jac);
    const BandedLU lu(jac);
    lu.solve_in_place(residual);
    for (std::size_t i = 0; i < n; ++i) v[i] += residual[i];
    if (!all_finite(v)) throw BlowUp(t, "non-finite values in Newton iteration");
    if (discrete_norm(residual, h) < cfg_.newton_tol) {
      last_iterations_ = it;
      return State{t, to_nodes(v)};
    }
  }
  throw NumericalBreakdown("Newton iteration did not converge in " +
                           std::to_string(cfg_.newton_max_iter) +
                           " iterations at t = " + std::to_string(t));
}

// ----------------------------------------------------------------- recording

void append_weight_terms(WeightSeries& series, const Grid& grid,
                         std::span<const double> damping,
                         std::span<const double> u,
                         std::span<const double> ux) {
  const WeightSpec& w = series.weight;
  const std::size_t n = u.size();
  double half = 0.0, grad = 0.0, adv = 0.0, disp = 0.0, cub = 0.0, damp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    const double u2 = u[i] * u[i];
    half += c * w.phi[i] * u2;
    grad += c * w.dphi[i] * ux[i] * ux[i];
    adv += c * w.dphi[i] * u2;
    disp += c * w.d3phi[i] * u2;
    cub += c * w.dphi[i] * u2 * u[i];
    damp += c * w.phi[i] * damping[i] * u2;
  }
  const double h = grid.dx();
  series.half_mass.push_back(0.5 * half * h);
  series.gradient.push_back(grad * h);
  series.advected.push_back(adv * h);
  series.dispersed.push_back(disp * h);
  series.cubic.push_back(cub * h);
  series.damped.push_back(damp * h);
}

namespace {

class Recorder {
 public:
  Recorder(Trajectory& traj, const OperatorSet& ops, const SolverConfig& cfg,
           const std::vector<WeightSpec>& monitored, std::size_t steps)
      : traj_(traj), cfg_(cfg) {
    traj_.damping = ops.damping_nodes;
    traj_.dt = cfg.dt;
    traj_.stride = cfg.stride;
    traj_.nonlinear = cfg.nonlinear;
    traj_.advection = ops.options.advection;
    traj_.dispersion = ops.options.dispersion;
    const std::size_t k = steps + 1;
    traj_.step_times.reserve(k);
    traj_.traces.reserve(k);
    traj_.energy.reserve(k);
    traj_.damping_dissipation.reserve(k);
    traj_.gradient_sq.reserve(k);
    traj_.tail_mass.reserve(k);
    for (const auto& w : monitored) {
      if (w.phi.size() != ops.grid.size()) {
        throw ConfigError("monitored weight '" + w.label +
                          "' was sampled on a different grid");
      }
      WeightSeries s;
      s.weight = w;
      traj_.weights.push_back(std::move(s));
    }
    tail_first_ = ops.grid.first_node_at_or_after((1.0 - cfg.tail_fraction) *
                                                  ops.grid.length());
    sq_.resize(ops.grid.size());
    work_.resize(ops.grid.size());
  }

  void record(std::size_t k, const State& s) {
    const Grid& g = traj_.grid;
    const double h = g.dx();
    const std::vector<double>& u = s.u;
    const std::vector<double> ux = node_derivative(u, h);
    const std::vector<double>& a = traj_.damping;
    const std::size_t n = u.size();

    traj_.step_times.push_back(s.t);
    traj_.traces.push_back(ux[0]);
    for (std::size_t i = 0; i < n; ++i) sq_[i] = u[i] * u[i];
    const double mass = trapezoid(g, sq_);
    traj_.energy.push_back(0.5 * mass);
    for (std::size_t i = 0; i < n; ++i) work_[i] = a[i] * sq_[i];
    traj_.damping_dissipation.push_back(trapezoid(g, work_));
    for (std::size_t i = 0; i < n; ++i) work_[i] = ux[i] * ux[i];
    traj_.gradient_sq.push_back(trapezoid(g, work_));
    const double tail = trapezoid_from(g, sq_, tail_first_);
    traj_.tail_mass.push_back(tail);
    if (k == 0) initial_mass_ = mass;
    if (!tail_warned_ && initial_mass_ > 0.0 &&
        tail > cfg_.tail_tolerance * initial_mass_) {
      std::ostringstream os;
      os << "tail mass " << tail << " exceeds " << cfg_.tail_tolerance
         << " of the initial mass at t = " << s.t
         << "; the truncation length may be too short";
      traj_.warnings.push_back(os.str());
      tail_warned_ = true;
    }

    for (auto& ws : traj_.weights) append_weight_terms(ws, g, a, u, ux);

    if (k % cfg_.stride == 0) traj_.states.push_back(s);
  }

 private:
  Trajectory& traj_;
  const SolverConfig& cfg_;
  std::size_t tail_first_ = 0;
  double initial_mass_ = 0.0;
  bool tail_warned_ = false;
  std::vector<double> sq_;
  std::vector<double> work_;
};

void check_initial(const State& u0, const OperatorSet& ops) {
  if (u0.u.size() != ops.grid.size()) {
    throw ConfigError("initial state does not match the grid");
  }
  if (!all_finite(u0.u)) throw ConfigError("initial state is not finite");
  if (u0.u.front() != 0.0 || u0.u.back() != 0.0) {
    throw ConfigError("initial state must vanish at x = 0 and x = L");
  }
}

}  // namespace

// ------------------------------------------------------------------- drivers

Trajectory solve(const State& u0, const OperatorSet& ops,
                 const SolverConfig& cfg,
                 const std::vector<WeightSpec>& monitored) {
  cfg.validate();
  check_initial(u0, ops);
  if (cfg.scheme == Scheme::PicardDuhamel) {
    return solve_picard(u0, ops, cfg, monitored);
  }
  const std::size_t steps = cfg.steps();
  Trajectory traj(ops.grid);
  Recorder rec(traj, ops, cfg, monitored, steps);
  State s{0.0, u0.u};
  rec.record(0, s);

  if (cfg.scheme == Scheme::ImexCnAb2) {
    ImexStepper stepper(ops, cfg);
    for (std::size_t k = 1; k <= steps; ++k) {
      s = stepper.step(s);
      s.t = static_cast<double>(k) * cfg.dt;
      rec.record(k, s);
    }
  } else {
    CnNewtonStepper stepper(ops, cfg);
    for (std::size_t k = 1; k <= steps; ++k) {
      s = stepper.step(s);
      s.t = static_cast<double>(k) * cfg.dt;
      traj.newton_iterations += static_cast<std::size_t>(stepper.last_iterations());
      rec.record(k, s);
    }
  }
  return traj;
}

State linear_propagator(const State& u0, const OperatorSet& ops, double t,
                        double dt) {
  if (!(t >= 0.0)) throw ConfigError("propagation time must be nonnegative");
  if (t == 0.0) return u0;
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const double ratio = t / dt;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("propagation time must be a multiple of dt");
  }
  const CrankNicolsonMap map(ops, dt);
  std::vector<double> u = to_interior(u0.u);
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    u = map.apply(u);
  }
  if (!all_finite(u)) throw BlowUp(u0.t + t, "non-finite values in propagator");
  return State{u0.t + t, to_nodes(u)};
}

namespace {

enum class PanelOutcome { Converged, NotContracting };

// Runs the fixed-point iteration on one panel of m steps starting from up.
// On success fills `out` with the m states after up.
PanelOutcome picard_panel(const OperatorSet& ops, const CrankNicolsonMap& map,
                          const SolverConfig& cfg, bool nonlinear,
                          const std::vector<double>& up, std::size_t m,
                          std::vector<std::vector<double>>& out,
                          std::size_t& iterations) {
  const double dt = cfg.dt;
  const double h = ops.dx();
  const std::size_t n = up.size();

  // free evolution W(t_j) u_p, j = 0..m; also the first iterate
  std::vector<std::vector<double>> free(m + 1);
  free[0] = up;
  for (std::size_t j = 1; j <= m; ++j) free[j] = map.apply(free[j - 1]);
  std::vector<std::vector<double>> cur = free;
  iterations = 1;
  if (!nonlinear) {
    out.assign(cur.begin() + 1, cur.end());
    return PanelOutcome::Converged;
  }

  int growth = 0;
  double last_dist = -1.0;
  std::vector<std::vector<double>> next(m + 1, std::vector<double>(n));
  for (int it = 1; it <= cfg.picard_max_iter; ++it) {
    // H_j = M H_{j-1} + dt N_j,  H_0 = dt/2 N_0;  G_j = H_j - dt/2 N_j
    std::vector<double> nj = nonlinear_term(ops, cur[0]);
    std::vector<double> acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = 0.5 * dt * nj[i];
    next[0] = up;
    double dist = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      acc = map.apply(acc);
      nj = nonlinear_term(ops, cur[j]);
      for (std::size_t i = 0; i < n; ++i) {
        acc[i] += dt * nj[i];
        next[j][i] = free[j][i] + acc[i] - 0.5 * dt * nj[i];
      }
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = next[j][i] - cur[j][i];
      dist = std::max(dist, discrete_norm(diff, h));
    }
    std::swap(cur, next);
    iterations = static_cast<std::size_t>(it);
    if (!std::isfinite(dist)) return PanelOutcome::NotContracting;
    if (dist < cfg.picard_tol) {
      out.assign(cur.begin() + 1, cur.end());
      return PanelOutcome::Converged;
    }
    if (last_dist >= 0.0 && dist > last_dist) {
      if (++growth >= 3) return PanelOutcome::NotContracting;
    } else {
      growth = 0;
    }
    last_dist = dist;
  }
  return PanelOutcome::NotContracting;
}

}  // namespace

Trajectory solve_picard(const State& u0, const OperatorSet& ops,
                        const SolverConfig& cfg,
                        const std::vector<WeightSpec>& monitored) {
  cfg.validate();
  check_initial(u0, ops);
  const std::size_t steps = cfg.steps();
  Trajectory traj(ops.grid);
  Recorder rec(traj, ops, cfg, monitored, steps);
  State s{0.0, u0.u};
  rec.record(0, s);

  const CrankNicolsonMap map(ops, cfg.dt);
  std::size_t panel_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.panel / cfg.dt)));
  int halvings = 0;
  std::size_t k = 0;
  std::vector<double> up = to_interior(u0.u);
  std::vector<std::vector<double>> out;
  while (k < steps) {
    const std::size_t m = std::min(panel_steps, steps - k);
    std::size_t its = 0;
    const PanelOutcome res =
        picard_panel(ops, map, cfg, cfg.nonlinear, up, m, out, its);
    traj.picard_iterations += its;
    if (res == PanelOutcome::NotContracting) {
      if (halvings >= cfg.max_panel_halvings || panel_steps == 1) {
        std::ostringstream os;
        os << "Picard iteration does not contract on a panel of length "
           << static_cast<double>(m) * cfg.dt << " at t = "
           << static_cast<double>(k) * cfg.dt << "; use a smaller panel";
        throw PanelTooLong(static_cast<double>(m) * cfg.dt, os.str());
      }
      panel_steps = std::max<std::size_t>(1, panel_steps / 2);
      ++halvings;
      traj.warnings.push_back("Picard panel halved to " +
                              std::to_string(static_cast<double>(panel_steps) *
                                             cfg.dt));
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      ++k;
      if (!all_finite(out[j])) {
        throw BlowUp(static_cast<double>(k) * cfg.dt,
                     "non-finite values in Picard iterate");
      }
      rec.record(k, State{static_cast<double>(k) * cfg.dt, to_nodes(out[j])});
    }
    up = out.back();
  }
  traj.picard_panel = static_cast<double>(panel_steps) * cfg.dt;
  return traj;
}

}  // namespace dkdv
