#include "dkdv/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "dkdv/error.hpp"

namespace dkdv {

BandedMatrix build_conjugated_generator(const OperatorSet& ops, double b) {
  if (!(b > 0.0)) throw ConfigError("conjugation rate b must be positive");
  const std::size_t n = ops.size();
  const double h = ops.dx();
  const BandedMatrix id = BandedMatrix::identity(n);

  BandedMatrix out(n, 2, 2);
  if (ops.options.advection) {
    // -(D1 - b)
    out = BandedMatrix::combine(1.0, out, -1.0, ops.d1);
    out = BandedMatrix::combine(1.0, out, b, id);
  }
  if (ops.options.dispersion) {
    // -(D1 - b)^3 = -D3 + 3b D2 - 3b^2 D1 + b^3
    out = BandedMatrix::combine(1.0, out, -1.0, ops.d3);
    out = BandedMatrix::combine(1.0, out, 3.0 * b, ops.d2);
    out = BandedMatrix::combine(1.0, out, -3.0 * b * b, ops.d1);
    out = BandedMatrix::combine(1.0, out, b * b * b, id);
  }

  const double kappa = ops.options.hyperviscosity;
  if (kappa != 0.0) {
    BandedMatrix f = BandedMatrix::combine(1.0, ops.d2, -2.0 * b, ops.d1);
    f = BandedMatrix::combine(1.0, f, b * b, id);
    out = BandedMatrix::combine(1.0, out, -kappa * h * h,
                                BandedMatrix::product(f, f));
  }
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) -= ops.damping[i];
  return out;
}

namespace {

BandedMatrix symmetric_part(const BandedMatrix& b) {
  return BandedMatrix::combine(0.5, b, 0.5, b.transposed());
}

BandedMatrix shifted(const BandedMatrix& s, double sigma) {
  // sigma I - S
  return BandedMatrix::combine(-1.0, s, sigma, BandedMatrix::identity(s.size()));
}

double rayleigh(const BandedMatrix& s, const std::vector<double>& x) {
  const std::vector<double> sx = s * std::span<const double>(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += x[i] * sx[i];
    den += x[i] * x[i];
  }
  return num / den;
}

}  // namespace

AbscissaResult numerical_abscissa_detail(const BandedMatrix& b, double tol,
                                         std::size_t max_iter) {
  const std::size_t n = b.size();
  if (n == 0) throw ConfigError("abscissa of an empty matrix");
  if (!(tol > 0.0)) throw ConfigError("abscissa tolerance must be positive");
  const BandedMatrix s = symmetric_part(b);

  double lo = -std::numeric_limits<double>::infinity();
  double hi = lo;
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    const std::size_t jlo = i >= s.lower() ? i - s.lower() : 0;
    const std::size_t jhi = std::min(n - 1, i + s.upper());
    for (std::size_t j = jlo; j <= jhi; ++j) {
      if (j != i) off += std::abs(s(i, j));
    }
    lo = std::max(lo, s(i, i));
    hi = std::max(hi, s(i, i) + off);
  }

  AbscissaResult r;
  // hi must be a strict upper bound
  double pad = std::max(tol, 1e-12 * std::max(1.0, std::abs(hi)));
  hi += pad;
  while (!BandedCholesky::positive_definite(shifted(s, hi))) {
    pad *= 2.0;
    hi += pad;
    ++r.bisection_steps;
  }

  const double width = 1e-8 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (BandedCholesky::positive_definite(shifted(s, mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++r.bisection_steps;
  }

  const BandedCholesky chol(shifted(s, hi));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist;
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  double rho = rayleigh(s, x);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    chol.solve_in_place(x);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : x) v /= norm;
    const double next = rayleigh(s, x);
    r.power_iterations = it;
    r.last_change = std::abs(next - rho);
    rho = next;
    if (r.last_change < tol) {
      r.value = rho;
      return r;
    }
  }
  std::ostringstream os;
  os << "shifted power iteration did not converge in " << max_iter
     << " iterations (last estimate " << rho << ", change " << r.last_change << ")";
  throw IterationError(rho, os.str());
}

double numerical_abscissa(const BandedMatrix& b, double tol,
                          std::size_t max_iter) {
  return numerical_abscissa_detail(b, tol, max_iter).value;
}

double spectral_abscissa_dense(const BandedMatrix& b) {
  const std::size_t n = b.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t jlo = i >= b.lower() ? i - b.lower() : 0;
    const std::size_t jhi = std::min(n - 1, i + b.upper());
    for (std::size_t j = jlo; j <= jhi; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b(i, j);
    }
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) {
    throw NumericalBreakdown("dense eigensolver failed");
  }
  return es.eigenvalues().real().maxCoeff();
}

GeneratorAnalysis analyze_generator(const OperatorSet& ops, double b,
                                    bool with_eigenvalue, double tol) {
  const BandedMatrix B = build_conjugated_generator(ops, b);
  const AbscissaResult r = numerical_abscissa_detail(B, tol);
  GeneratorAnalysis g;
  g.b = b;
  g.abscissa = r.value;
  g.analytic_bound = b * b * b + b;
  g.bisection_steps = r.bisection_steps;
  g.power_iterations = r.power_iterations;
  if (with_eigenvalue) g.leading_eigenvalue = spectral_abscissa_dense(B);
  return g;
}

PredictionReport predicted_vs_fitted(const GeneratorAnalysis& analysis,
                                     const DecayFit& fit, double tol) {
  PredictionReport p;
  p.b = analysis.b;
  p.abscissa = analysis.abscissa;
  p.guaranteed_rate = -analysis.abscissa;
  p.fitted_rate = fit.rate;
  p.norm = fit.norm;
  if (analysis.abscissa >= 0.0) {
    p.flag = "no guarantee";
  } else if (fit.rate >= p.guaranteed_rate - tol) {
    p.flag = "consistent";
  } else {
    p.flag = "inconsistent";
  }
  return p;
}

}  // namespace dkdv
