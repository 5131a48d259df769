#pragma once

#include <cstddef>
#include <vector>

namespace dkdv {

/// Uniform grid on [0, L] with nodes x_i = i * dx, i = 0..N-1.
class Grid {
 public:
  Grid(double length, std::size_t points);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Number of unknowns once u(0) = u(L) = 0 are eliminated.
  std::size_t interior_size() const noexcept { return nodes_.size() - 2; }
  double dx() const noexcept { return dx_; }
  double x(std::size_t i) const noexcept { return nodes_[i]; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// Index of the first node with x_i >= position (size() if none).
  std::size_t first_node_at_or_after(double position) const;

  bool operator==(const Grid& other) const noexcept {
    return length_ == other.length_ && nodes_.size() == other.nodes_.size();
  }

 private:
  double length_;
  double dx_;
  std::vector<double> nodes_;
};

/// Throws ConfigError unless length > 0 and points >= 8.
Grid build_grid(double length, std::size_t points);

}  // namespace dkdv
