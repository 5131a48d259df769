#include "dkdv/damping.hpp"

#include <algorithm>
#include <cmath>

#include "dkdv/error.hpp"

namespace dkdv {

std::string to_string(DampingShape shape) {
  switch (shape) {
    case DampingShape::Step: return "step";
    case DampingShape::SmoothRamp: return "smooth-ramp";
    case DampingShape::Custom: return "custom";
  }
  return "unknown";
}

DampingShape damping_shape_from_string(const std::string& name) {
  if (name == "step") return DampingShape::Step;
  if (name == "smooth-ramp") return DampingShape::SmoothRamp;
  if (name == "custom") return DampingShape::Custom;
  throw ConfigError("unknown damping shape '" + name + "'");
}

double DampingProfile::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

bool DampingProfile::is_constant() const {
  // node 0 never matters because u(0) = 0
  if (values.size() < 2) return true;
  return std::all_of(values.begin() + 1, values.end(),
                     [&](double a) { return a == values[1]; });
}

namespace {

bool check_hypothesis(const Grid& grid, const std::vector<double>& a,
                      double a0, double from) {
  const std::size_t first = grid.first_node_at_or_after(from);
  for (std::size_t i = first; i < grid.size(); ++i) {
    if (a[i] < a0) return false;
  }
  return true;
}

}  // namespace

DampingProfile build_damping(const Grid& grid, double a0, double x0,
                             DampingShape shape, double ramp_width) {
  if (!(a0 > 0.0)) throw ConfigError("damping floor a0 must be positive");
  if (!(x0 > 0.0) || !(x0 < grid.length())) {
    throw ConfigError("damping activation point x0 must lie in (0, L)");
  }
  if (shape == DampingShape::Custom) {
    throw ConfigError("use custom_damping() for custom profiles");
  }
  if (shape == DampingShape::SmoothRamp) {
    if (!(ramp_width >= 0.0) || !(x0 + ramp_width < grid.length())) {
      throw ConfigError("smooth ramp needs ramp_width >= 0 and x0 + width < L");
    }
  } else {
    ramp_width = 0.0;
  }

  DampingProfile p;
  p.a0 = a0;
  p.x0 = x0;
  p.ramp_width = ramp_width;
  p.shape = shape;
  p.values.resize(grid.size());
  const double tol = 1e-9 * grid.dx();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    double a = 0.0;
    if (x >= x0 - tol) {
      if (shape == DampingShape::SmoothRamp && ramp_width > 0.0 &&
          x < x0 + ramp_width) {
        const double s = std::clamp((x - x0) / ramp_width, 0.0, 1.0);
        a = a0 * s * s * (3.0 - 2.0 * s);
      } else {
        a = a0;
      }
    }
    p.values[i] = a;
  }
  p.hypothesis_holds = check_hypothesis(grid, p.values, a0, x0 + ramp_width);
  return p;
}

DampingProfile constant_damping(const Grid& grid, double a0) {
  return build_damping(grid, a0, grid.dx(), DampingShape::Step);
}

DampingProfile custom_damping(const Grid& grid,
                              const std::function<double(double)>& a,
                              double a0, double x0) {
  DampingProfile p;
  p.a0 = a0;
  p.x0 = x0;
  p.shape = DampingShape::Custom;
  p.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = a(grid.x(i));
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("custom damping must be finite and nonnegative");
    }
    p.values[i] = v;
  }
  p.hypothesis_holds = a0 > 0.0 && check_hypothesis(grid, p.values, a0, x0);
  return p;
}

}  // namespace dkdv
