#include "dkdv/operators.hpp"

#include <algorithm>
#include <string>

#include "dkdv/error.hpp"

namespace dkdv {

namespace {

// Row j of the half-grid derivative Q applied to w (length J).
double q_row(std::span<const double> w, std::size_t j) {
  const std::size_t J = w.size();
  if (j == 0) return -9.0 / 8.0 * w[0] + 9.0 / 8.0 * w[1];
  if (j == 1) return -3.0 / 8.0 * w[0] - 1.0 / 8.0 * w[1] + 0.5 * w[2];
  if (j == J - 1) return -0.5 * w[J - 2] - 0.5 * w[J - 1];
  return 0.5 * (w[j + 1] - w[j - 1]);
}

}  // namespace

std::vector<double> apply_third_derivative(std::span<const double> interior,
                                           double dx) {
  const std::size_t n = interior.size();
  const std::size_t J = n + 1;
  auto u = [&](std::size_t node) -> double {
    return (node == 0 || node > n) ? 0.0 : interior[node - 1];
  };
  std::vector<double> w(J);
  for (std::size_t j = 0; j < J; ++j) w[j] = (u(j + 1) - u(j)) / dx;
  std::vector<double> z(J);
  for (std::size_t j = 0; j < J; ++j) z[j] = q_row(w, j);
  std::vector<double> out(n);
  const double s = 1.0 / (dx * dx);
  for (std::size_t i = 1; i <= n; ++i) out[i - 1] = (z[i] - z[i - 1]) * s;
  return out;
}

OperatorSet build_operators(const Grid& grid, const DampingProfile& damping,
                            OperatorOptions options) {
  if (damping.values.size() != grid.size()) {
    throw ConfigError("damping profile has " +
                      std::to_string(damping.values.size()) +
                      " samples but the grid has " +
                      std::to_string(grid.size()) + " nodes");
  }
  const std::size_t n = grid.interior_size();
  const double h = grid.dx();

  OperatorSet ops{grid,
                  std::vector<double>(damping.values.begin() + 1,
                                      damping.values.end() - 1),
                  damping.values,
                  BandedMatrix(n, 1, 1),
                  BandedMatrix(n, 1, 1),
                  BandedMatrix(n, 2, 2),
                  BandedMatrix(),
                  BandedMatrix(),
                  options};

  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      ops.d1.at(i, i - 1) = -0.5 / h;
      ops.d2.at(i, i - 1) = 1.0 / (h * h);
    }
    if (i + 1 < n) {
      ops.d1.at(i, i + 1) = 0.5 / h;
      ops.d2.at(i, i + 1) = 1.0 / (h * h);
    }
    ops.d2.at(i, i) = -2.0 / (h * h);
  }

  // D3 has bandwidth 2, so columns c = r (mod 5) have disjoint row supports
  // and five matrix-free applications recover every entry.
  for (std::size_t colour = 0; colour < 5; ++colour) {
    std::vector<double> probe(n, 0.0);
    for (std::size_t c = colour; c < n; c += 5) probe[c] = 1.0;
    const std::vector<double> image = apply_third_derivative(probe, h);
    for (std::size_t c = colour; c < n; c += 5) {
      const std::size_t rlo = c >= 2 ? c - 2 : 0;
      const std::size_t rhi = std::min(n - 1, c + 2);
      for (std::size_t row = rlo; row <= rhi; ++row) {
        ops.d3.at(row, c) = image[row];
      }
    }
  }

  ops.d4 = BandedMatrix::product(ops.d2, ops.d2);
  const double filter = options.hyperviscosity * h * h;

  BandedMatrix gen(n, 2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t jlo = i >= 2 ? i - 2 : 0;
    const std::size_t jhi = std::min(n - 1, i + 2);
    for (std::size_t j = jlo; j <= jhi; ++j) {
      double v = 0.0;
      if (options.dispersion) v -= ops.d3(i, j);
      if (options.advection) v -= ops.d1(i, j);
      v -= filter * ops.d4(i, j);
      if (i == j) v -= ops.damping[i];
      gen.at(i, j) = v;
    }
  }
  ops.generator = std::move(gen);
  return ops;
}

std::vector<double> to_nodes(std::span<const double> interior) {
  std::vector<double> full(interior.size() + 2, 0.0);
  std::copy(interior.begin(), interior.end(), full.begin() + 1);
  return full;
}

std::vector<double> to_interior(std::span<const double> nodes) {
  if (nodes.size() < 3) throw ConfigError("node vector too short");
  return std::vector<double>(nodes.begin() + 1, nodes.end() - 1);
}

double boundary_trace(std::span<const double> nodes, double dx) {
  return (-3.0 * nodes[0] + 4.0 * nodes[1] - nodes[2]) / (2.0 * dx);
}

std::vector<double> node_derivative(std::span<const double> nodes, double dx) {
  const std::size_t n = nodes.size();
  std::vector<double> d(n);
  d[0] = boundary_trace(nodes, dx);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d[i] = (nodes[i + 1] - nodes[i - 1]) / (2.0 * dx);
  }
  d[n - 1] = (3.0 * nodes[n - 1] - 4.0 * nodes[n - 2] + nodes[n - 3]) / (2.0 * dx);
  return d;
}

}  // namespace dkdv
