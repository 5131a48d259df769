#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dkdv/grid.hpp"

namespace dkdv {

enum class DampingShape { Step, SmoothRamp, Custom };

std::string to_string(DampingShape shape);
DampingShape damping_shape_from_string(const std::string& name);

/// Nonnegative damping coefficient a(x) sampled on a grid, together with the
/// localisation data (a0, x0) it was built from.
struct DampingProfile {
  std::vector<double> values;
  double a0 = 0.0;
  double x0 = 0.0;
  double ramp_width = 0.0;
  DampingShape shape = DampingShape::Step;
  /// True when a_i >= a0 at every node with x_i >= x0 + ramp_width.
  bool hypothesis_holds = false;

  double max() const;
  /// True when every sample equals the same value.
  bool is_constant() const;
};

/// Step: a = 0 below x0 and a0 above. Smooth ramp: C^1 cubic blend from 0 to
/// a0 across [x0, x0 + ramp_width].
DampingProfile build_damping(const Grid& grid, double a0, double x0,
                             DampingShape shape, double ramp_width = 0.0);

/// a ≡ a0 on every node with x > 0 (the degenerate step with x0 = dx).
DampingProfile constant_damping(const Grid& grid, double a0);

/// Arbitrary nonnegative profile; (a0, x0) are only used to record whether the
/// localisation hypothesis holds.
DampingProfile custom_damping(const Grid& grid,
                              const std::function<double(double)>& a,
                              double a0, double x0);

}  // namespace dkdv
