#include "dkdv/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dkdv/error.hpp"

namespace dkdv {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), data_(n * (kl + ku + 1), 0.0) {}

BandedMatrix BandedMatrix::identity(std::size_t n) {
  BandedMatrix m(n, 0, 0);
  std::fill(m.data_.begin(), m.data_.end(), 1.0);
  return m;
}

BandedMatrix BandedMatrix::diagonal(std::span<const double> d) {
  BandedMatrix m(d.size(), 0, 0);
  std::copy(d.begin(), d.end(), m.data_.begin());
  return m;
}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const noexcept {
  if (i >= n_ || j >= n_ || !in_band(i, j)) return 0.0;
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_ || !in_band(i, j)) {
    throw std::out_of_range("banded entry (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") outside the band");
  }
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

void BandedMatrix::multiply(std::span<const double> x,
                            std::span<double> y) const {
  const std::size_t w = kl_ + ku_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i >= kl_ ? i - kl_ : 0;
    const std::size_t jhi = std::min(n_ - 1, i + ku_);
    const double* row = &data_[i * w + kl_ - i];
    double s = 0.0;
    for (std::size_t j = jlo; j <= jhi; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

std::vector<double> BandedMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

BandedMatrix BandedMatrix::transposed() const {
  BandedMatrix t(n_, ku_, kl_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i >= kl_ ? i - kl_ : 0;
    const std::size_t jhi = std::min(n_ - 1, i + ku_);
    for (std::size_t j = jlo; j <= jhi; ++j) t.at(j, i) = (*this)(i, j);
  }
  return t;
}

BandedMatrix BandedMatrix::combine(double alpha, const BandedMatrix& a,
                                   double beta, const BandedMatrix& b) {
  if (a.size() != b.size()) throw ConfigError("banded size mismatch");
  BandedMatrix c(a.size(), std::max(a.kl_, b.kl_), std::max(a.ku_, b.ku_));
  for (std::size_t i = 0; i < c.n_; ++i) {
    const std::size_t jlo = i >= c.kl_ ? i - c.kl_ : 0;
    const std::size_t jhi = std::min(c.n_ - 1, i + c.ku_);
    for (std::size_t j = jlo; j <= jhi; ++j) {
      c.at(i, j) = alpha * a(i, j) + beta * b(i, j);
    }
  }
  return c;
}

BandedMatrix& BandedMatrix::operator+=(const BandedMatrix& other) {
  *this = combine(1.0, *this, 1.0, other);
  return *this;
}

BandedMatrix& BandedMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

std::vector<std::vector<double>> BandedMatrix::to_dense() const {
  std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) d[i][j] = (*this)(i, j);
  }
  return d;
}

BandedLU::BandedLU(const BandedMatrix& a)
    : n_(a.size()),
      kl_(a.lower()),
      ku_(a.upper()),
      width_(2 * a.lower() + a.upper() + 1),
      lu_(a.size() * (2 * a.lower() + a.upper() + 1), 0.0),
      pivot_(a.size()) {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i >= kl_ ? i - kl_ : 0;
    const std::size_t jhi = std::min(n_ - 1, i + ku_);
    for (std::size_t j = jlo; j <= jhi; ++j) elem(i, j) = a(i, j);
  }
  const std::size_t uw = kl_ + ku_;  // upper bandwidth of U after pivoting
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t rlast = std::min(n_ - 1, k + kl_);
    std::size_t p = k;
    double best = std::abs(elem(k, k));
    for (std::size_t r = k + 1; r <= rlast; ++r) {
      if (std::abs(elem(r, k)) > best) {
        best = std::abs(elem(r, k));
        p = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) {
      throw NumericalBreakdown("singular banded system at row " +
                               std::to_string(k));
    }
    pivot_[k] = p;
    const std::size_t clast = std::min(n_ - 1, k + uw);
    if (p != k) {
      // row p may only reach column p + ku <= k + uw
      for (std::size_t j = k; j <= clast; ++j) std::swap(elem(k, j), elem(p, j));
    }
    const double inv = 1.0 / elem(k, k);
    for (std::size_t r = k + 1; r <= rlast; ++r) {
      const double l = elem(r, k) * inv;
      elem(r, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j <= clast; ++j) elem(r, j) -= l * elem(k, j);
    }
  }
}

void BandedLU::solve_in_place(std::span<double> b) const {
  if (b.size() != n_) throw ConfigError("banded solve size mismatch");
  for (std::size_t k = 0; k < n_; ++k) {
    if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
    const std::size_t rlast = std::min(n_ - 1, k + kl_);
    for (std::size_t r = k + 1; r <= rlast; ++r) b[r] -= elem(r, k) * b[k];
  }
  const std::size_t uw = kl_ + ku_;
  for (std::size_t k = n_; k-- > 0;) {
    const std::size_t clast = std::min(n_ - 1, k + uw);
    double s = b[k];
    for (std::size_t j = k + 1; j <= clast; ++j) s -= elem(k, j) * b[j];
    b[k] = s / elem(k, k);
  }
}

std::vector<double> BandedLU::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

BandedMatrix BandedMatrix::product(const BandedMatrix& a,
                                   const BandedMatrix& b) {
  if (a.n_ != b.n_) throw ConfigError("banded product: size mismatch");
  const std::size_t n = a.n_;
  BandedMatrix c(n, a.kl_ + b.kl_, a.ku_ + b.ku_);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t klo = i >= a.kl_ ? i - a.kl_ : 0;
    const std::size_t khi = std::min(n - 1, i + a.ku_);
    for (std::size_t k = klo; k <= khi; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const std::size_t jlo = k >= b.kl_ ? k - b.kl_ : 0;
      const std::size_t jhi = std::min(n - 1, k + b.ku_);
      for (std::size_t j = jlo; j <= jhi; ++j) c.at(i, j) += aik * b(k, j);
    }
  }
  return c;
}

BandedCholesky::BandedCholesky(const BandedMatrix& a) {
  if (!factor(a)) {
    throw NumericalBreakdown("Cholesky factorisation: matrix is not positive definite");
  }
}

bool BandedCholesky::positive_definite(const BandedMatrix& a) {
  BandedCholesky c;
  return c.factor(a);
}

bool BandedCholesky::factor(const BandedMatrix& a) {
  n_ = a.size();
  k_ = a.lower();
  l_.assign(n_ * (k_ + 1), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i >= k_ ? i - k_ : 0;
    for (std::size_t j = jlo; j <= i; ++j) {
      double sum = a(i, j);
      const std::size_t plo = std::max(jlo, j >= k_ ? j - k_ : 0);
      for (std::size_t p = plo; p < j; ++p) sum -= elem(i, p) * elem(j, p);
      if (i == j) {
        if (!(sum > 0.0)) return false;
        elem(i, i) = std::sqrt(sum);
      } else {
        elem(i, j) = sum / elem(j, j);
      }
    }
  }
  return true;
}

void BandedCholesky::solve_in_place(std::span<double> b) const {
  if (b.size() != n_) throw ConfigError("Cholesky solve: size mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = b[i];
    const std::size_t jlo = i >= k_ ? i - k_ : 0;
    for (std::size_t j = jlo; j < i; ++j) sum -= elem(i, j) * b[j];
    b[i] = sum / elem(i, i);
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double sum = b[ii];
    const std::size_t jhi = std::min(n_ - 1, ii + k_);
    for (std::size_t j = ii + 1; j <= jhi; ++j) sum -= elem(j, ii) * b[j];
    b[ii] = sum / elem(ii, ii);
  }
}

}  // namespace dkdv
