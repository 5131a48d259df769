#pragma once

#include <span>

#include "dkdv/grid.hpp"
#include "dkdv/weight.hpp"

namespace dkdv {

/// Trapezoid rule for the integral of phi * f over [0, L].
double quadrature(const Grid& grid, std::span<const double> values,
                  const WeightSpec& weight);

/// Unweighted trapezoid rule over the whole grid.
double trapezoid(const Grid& grid, std::span<const double> values);

/// Trapezoid rule over nodes first..N-1.
double trapezoid_from(const Grid& grid, std::span<const double> values,
                      std::size_t first);

/// Trapezoid rule over a uniformly spaced series between indices lo and hi.
double trapezoid_series(std::span<const double> values, double step,
                        std::size_t lo, std::size_t hi);

}  // namespace dkdv
