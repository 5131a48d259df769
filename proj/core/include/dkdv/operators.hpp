#pragma once

#include <span>
#include <vector>

#include "dkdv/banded.hpp"
#include "dkdv/damping.hpp"
#include "dkdv/grid.hpp"

namespace dkdv {

/// Switches used by tests to isolate parts of the generator.
struct OperatorOptions {
  bool advection = true;   // the u_x term
  bool dispersion = true;  // the u_xxx term
  /// kappa in the grid-scale filter term -kappa dx^2 D2 D2 of the generator.
  double hyperviscosity = 0.2;
};

/// Discrete derivatives acting on interior unknowns u_1..u_{N-2}, with
/// u(0) = u(L) = 0 and u_x(L) = 0 eliminated.
///
/// D1 is the centred difference and is exactly skew-symmetric. D2 is the
/// centred second difference (symmetric, negative definite). D3 is assembled
/// as Bm Q Dp / dx^2: Dp takes forward differences onto the half grid, Q is a
/// first derivative there with the boundary closure
///
///   Q[0,0..1] = (-9/8, 9/8),  Q[1,0..2] = (-3/8, -1/8, 1/2),  Q[J,J] = -1/2,
///
/// and Bm is the backward difference back onto the nodes. The interior rows
/// reduce to the centred five-point stencil and
///   <u, D3 u> = 1/2 ((4u_1 - u_2) / 2dx)^2 + 1/2 (u_{N-2} / dx)^2 >= 0,
/// The generator is Agen = -D3 - D1 - kappa dx^2 D2 D2 - diag(a). The filter
/// term damps the sawtooth (-1)^j, which lies in the kernel of the interior
/// D1 and D3 stencils. Every part is dissipative, so Agen is too.
struct OperatorSet {
  Grid grid;
  std::vector<double> damping;        // a_i at interior nodes
  std::vector<double> damping_nodes;  // a_i at all nodes
  BandedMatrix d1;
  BandedMatrix d2;
  BandedMatrix d3;
  BandedMatrix d4;  // D2 D2
  BandedMatrix generator;
  OperatorOptions options;

  std::size_t size() const noexcept { return grid.interior_size(); }
  double dx() const noexcept { return grid.dx(); }
};

OperatorSet build_operators(const Grid& grid, const DampingProfile& damping,
                            OperatorOptions options = {});

/// Matrix-free D3 on interior unknowns; the definition the banded matrix is
/// assembled from.
std::vector<double> apply_third_derivative(std::span<const double> interior,
                                           double dx);

/// Full node vector (size N) from interior unknowns, with zero end values.
std::vector<double> to_nodes(std::span<const double> interior);
/// Interior unknowns from a full node vector.
std::vector<double> to_interior(std::span<const double> nodes);

/// One-sided second-order u_x(0) from a full node vector.
double boundary_trace(std::span<const double> nodes, double dx);

/// Node-wise first derivative: centred inside, one-sided second order at both
/// ends.
std::vector<double> node_derivative(std::span<const double> nodes, double dx);

}  // namespace dkdv
