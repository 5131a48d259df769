#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dkdv/grid.hpp"

namespace dkdv {

enum class WeightFamily { Unit, Polynomial, Exponential, Custom };

/// A spatial weight phi with analytically sampled phi' and phi'''.
///
/// Polynomial-m is (x+1)^m, exponential-b is e^{2bx}. Custom weights (for
/// instance phi = x) carry their own closed forms and only need phi >= 0.
struct WeightSpec {
  WeightFamily family = WeightFamily::Unit;
  int m = 0;
  double b = 0.0;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::vector<double> d3phi;
  double phi_at_origin = 1.0;
  std::string label;
};

WeightSpec unit_weight(const Grid& grid);
/// (x+1)^m, m >= 0.
WeightSpec polynomial_weight(const Grid& grid, int m);
/// e^{2bx}, b > 0.
WeightSpec exponential_weight(const Grid& grid, double b);
/// phi = x; vanishes at the origin so the trace term drops out.
WeightSpec linear_weight(const Grid& grid);
WeightSpec custom_weight(const Grid& grid, const std::string& label,
                         const std::function<double(double)>& phi,
                         const std::function<double(double)>& dphi,
                         const std::function<double(double)>& d3phi);

/// family in {"unit", "polynomial", "exponential", "linear"}; param is m or b.
WeightSpec build_weight(const Grid& grid, const std::string& family,
                        double param);

}  // namespace dkdv
