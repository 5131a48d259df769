#include "dkdv/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dkdv/error.hpp"

namespace dkdv {

namespace {

double profile(const InitialDatum& d, double x) {
  const double z = (x - d.center) / d.width;
  if (d.tag == "gaussian") return d.amplitude * std::exp(-z * z);
  if (d.tag == "sech2") {
    const double s = 1.0 / std::cosh(z);
    return d.amplitude * s * s;
  }
  if (d.tag == "hat") return d.amplitude * std::max(0.0, 1.0 - std::abs(z));
  if (d.tag == "bump") {
    if (std::abs(z) >= 1.0) return 0.0;
    return d.amplitude * std::exp(1.0 - 1.0 / (1.0 - z * z));
  }
  if (d.tag == "zero") return 0.0;
  throw ConfigError("unknown initial datum tag '" + d.tag + "'");
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

SampledDatum sample_initial(const Grid& grid, const InitialDatum& datum) {
  SampledDatum out;
  std::vector<double>& u = out.state.u;
  if (datum.tag == "samples") {
    if (datum.samples.size() != grid.size()) {
      throw ConfigError("initial samples have " + std::to_string(datum.samples.size()) +
                        " values but the grid has " + std::to_string(grid.size()) +
                        " nodes");
    }
    u = datum.samples;
  } else {
    if (datum.tag != "zero" && !(datum.width > 0.0)) {
      throw ConfigError("initial datum width must be positive");
    }
    u.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) u[i] = profile(datum, grid.x(i));
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw ConfigError("initial datum is not finite");
  }
  out.clamp_perturbation = std::max(std::abs(u.front()), std::abs(u.back()));
  u.front() = 0.0;
  u.back() = 0.0;
  double scale = std::abs(datum.amplitude);
  if (datum.tag == "samples") {
    for (double v : datum.samples) scale = std::max(scale, std::abs(v));
  }
  if (out.clamp_perturbation > 1e-8 * scale) {
    std::ostringstream os;
    os << "initial datum clamped to zero at the ends (perturbation "
       << out.clamp_perturbation << ")";
    out.warning = os.str();
  }
  return out;
}

DampingProfile make_damping(const Grid& grid, const DampingSpec& spec) {
  if (spec.kind == "step") {
    return build_damping(grid, spec.a0, spec.x0, DampingShape::Step);
  }
  if (spec.kind == "smooth") {
    return build_damping(grid, spec.a0, spec.x0, DampingShape::SmoothRamp,
                         spec.ramp_width);
  }
  if (spec.kind == "constant") return constant_damping(grid, spec.a0);
  if (spec.kind == "none") {
    return custom_damping(grid, [](double) { return 0.0; }, 0.0, grid.length());
  }
  throw ConfigError("unknown damping kind '" + spec.kind + "'");
}

std::string canonical_string(const Scenario& s) {
  std::ostringstream os;
  os << "L=" << exact(s.length) << ";damping=" << s.damping.kind
     << ",a0=" << exact(s.damping.a0) << ",x0=" << exact(s.damping.x0)
     << ",ramp=" << exact(s.damping.ramp_width) << ";datum=" << s.datum.tag
     << ",A=" << exact(s.datum.amplitude) << ",c=" << exact(s.datum.center)
     << ",w=" << exact(s.datum.width) << ",samples=";
  for (double v : s.datum.samples) os << exact(v) << ',';
  os << ";advection=" << s.options.advection << ",dispersion=" << s.options.dispersion
     << ",kappa=" << exact(s.options.hyperviscosity) << ";nonlinear=" << s.nonlinear
     << ";T=" << exact(s.final_time);
  return os.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t scenario_hash(const Scenario& s) { return fnv1a(canonical_string(s)); }

}  // namespace dkdv
