#include "dkdv/quadrature.hpp"

#include <cmath>

#include "dkdv/error.hpp"

namespace dkdv {

namespace {

void check_size(const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) {
    throw ConfigError("node vector length does not match the grid");
  }
}

}  // namespace

double quadrature(const Grid& grid, std::span<const double> values,
                  const WeightSpec& weight) {
  check_size(grid, values);
  if (weight.phi.size() != grid.size()) {
    throw ConfigError("weight was sampled on a different grid");
  }
  const std::size_t n = values.size();
  double s = 0.5 * (weight.phi[0] * values[0] + weight.phi[n - 1] * values[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += weight.phi[i] * values[i];
  s *= grid.dx();
  if (!std::isfinite(s)) throw ConfigError("non-finite integrand");
  return s;
}

double trapezoid(const Grid& grid, std::span<const double> values) {
  return trapezoid_from(grid, values, 0);
}

double trapezoid_from(const Grid& grid, std::span<const double> values,
                      std::size_t first) {
  check_size(grid, values);
  const std::size_t n = values.size();
  if (first + 1 >= n) return 0.0;
  double s = 0.5 * (values[first] + values[n - 1]);
  for (std::size_t i = first + 1; i + 1 < n; ++i) s += values[i];
  return s * grid.dx();
}

double trapezoid_series(std::span<const double> values, double step,
                        std::size_t lo, std::size_t hi) {
  if (hi <= lo) return 0.0;
  double s = 0.5 * (values[lo] + values[hi]);
  for (std::size_t k = lo + 1; k < hi; ++k) s += values[k];
  return s * step;
}

}  // namespace dkdv
