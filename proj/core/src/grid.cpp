#include "dkdv/grid.hpp"

#include <cmath>
#include <string>

#include "dkdv/error.hpp"

namespace dkdv {

Grid::Grid(double length, std::size_t points) : length_(length), dx_(0.0) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ConfigError("grid length must be positive, got " +
                      std::to_string(length));
  }
  if (points < 8) {
    throw ConfigError("grid needs at least 8 points, got " +
                      std::to_string(points));
  }
  dx_ = length / static_cast<double>(points - 1);
  nodes_.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    nodes_[i] = static_cast<double>(i) * dx_;
  }
  nodes_.back() = length;
}

std::size_t Grid::first_node_at_or_after(double position) const {
  // tolerate round-off so that position == x_i lands on i
  const double tol = 1e-9 * dx_;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] >= position - tol) return i;
  }
  return nodes_.size();
}

Grid build_grid(double length, std::size_t points) {
  return Grid(length, points);
}

}  // namespace dkdv
