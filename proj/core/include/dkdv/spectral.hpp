#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dkdv/banded.hpp"
#include "dkdv/diagnostics.hpp"
#include "dkdv/operators.hpp"

namespace dkdv {

/// Generator of the equation for v = e^{bx} u:
///
///   B = -(D1 - b) - (D1 - b)^3 - kappa dx^2 (D2 - 2b D1 + b^2)^2 - diag(a)
///     = -D1 + b - D3 + 3b D2 - 3b^2 D1 + b^3 - filter - diag(a),
///
/// on the same interior unknowns as the OperatorSet. At b = 0 it is Agen.
BandedMatrix build_conjugated_generator(const OperatorSet& ops, double b);

struct AbscissaResult {
  double value = 0.0;
  std::size_t bisection_steps = 0;
  std::size_t power_iterations = 0;
  double last_change = 0.0;
};

/// Largest eigenvalue of (B + B^T) / 2 (the trapezoid inner product on
/// interior unknowns is dx times the Euclidean one, so the scaling drops
/// out). Sylvester bisection with banded Cholesky brackets the top of the
/// spectrum, then shifted inverse power iteration runs until successive
/// Rayleigh quotients differ by less than tol.
AbscissaResult numerical_abscissa_detail(const BandedMatrix& b, double tol = 1e-10,
                                         std::size_t max_iter = 500);

double numerical_abscissa(const BandedMatrix& b, double tol = 1e-10,
                          std::size_t max_iter = 500);

/// Rightmost real part of the eigenvalues of B, from a dense eigensolver.
double spectral_abscissa_dense(const BandedMatrix& b);

struct GeneratorAnalysis {
  double b = 0.0;
  double abscissa = 0.0;
  double analytic_bound = 0.0;  // b^3 + b
  std::optional<double> leading_eigenvalue;
  std::size_t bisection_steps = 0;
  std::size_t power_iterations = 0;
};

/// Abscissa of the conjugated generator; the dense eigenvalue estimate is
/// computed only when requested (cubic cost).
GeneratorAnalysis analyze_generator(const OperatorSet& ops, double b,
                                    bool with_eigenvalue = false,
                                    double tol = 1e-10);

struct PredictionReport {
  double b = 0.0;
  double abscissa = 0.0;
  double guaranteed_rate = 0.0;  // -abscissa
  double fitted_rate = 0.0;
  std::string norm;
  /// "consistent", "inconsistent", or "no guarantee" when abscissa >= 0.
  std::string flag;
};

/// Compares a fitted decay rate with the rate -omega the abscissa
/// guarantees for the linear flow.
PredictionReport predicted_vs_fitted(const GeneratorAnalysis& analysis,
                                     const DecayFit& fit, double tol = 1e-3);

}  // namespace dkdv
