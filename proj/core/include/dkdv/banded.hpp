#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dkdv {

/// Square matrix with kl sub-diagonals and ku super-diagonals, stored row-wise.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  static BandedMatrix identity(std::size_t n);
  static BandedMatrix diagonal(std::span<const double> d);

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return j + kl_ >= i && j <= i + ku_;
  }
  /// Entry (i, j); zero outside the band.
  double operator()(std::size_t i, std::size_t j) const noexcept;
  /// Mutable entry; (i, j) must lie in the band.
  double& at(std::size_t i, std::size_t j);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  BandedMatrix transposed() const;
  BandedMatrix& operator+=(const BandedMatrix& other);
  BandedMatrix& operator*=(double s);
  /// alpha * A + beta * B, with a band wide enough for both.
  static BandedMatrix combine(double alpha, const BandedMatrix& a, double beta,
                              const BandedMatrix& b);

  std::vector<std::vector<double>> to_dense() const;

  /// A * B, banded with kl = kl_A + kl_B and ku = ku_A + ku_B.
  static BandedMatrix product(const BandedMatrix& a, const BandedMatrix& b);

 private:
  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::vector<double> data_;
};

/// LU factorisation with partial pivoting of a banded matrix.
class BandedLU {
 public:
  /// Throws NumericalBreakdown if a zero pivot is met.
  explicit BandedLU(const BandedMatrix& a);

  void solve_in_place(std::span<double> b) const;
  std::vector<double> solve(std::span<const double> b) const;
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::size_t width_ = 0;  // columns i-kl .. i+kl+ku stored per row
  std::vector<double> lu_;
  std::vector<std::size_t> pivot_;

  double& elem(std::size_t i, std::size_t j) {
    return lu_[i * width_ + (j + kl_ - i)];
  }
  double elem(std::size_t i, std::size_t j) const {
    return lu_[i * width_ + (j + kl_ - i)];
  }
};

/// Cholesky factorisation L L^T of a symmetric positive definite banded
/// matrix; only the lower band of the input is read.
class BandedCholesky {
 public:
  /// Throws NumericalBreakdown if the matrix is not positive definite.
  explicit BandedCholesky(const BandedMatrix& a);

  /// True when the factorisation exists, without throwing.
  static bool positive_definite(const BandedMatrix& a);

  void solve_in_place(std::span<double> b) const;
  std::size_t size() const noexcept { return n_; }

 private:
  BandedCholesky() = default;
  bool factor(const BandedMatrix& a);

  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> l_;  // row i holds columns i-k .. i

  double& elem(std::size_t i, std::size_t j) { return l_[i * (k_ + 1) + (j + k_ - i)]; }
  double elem(std::size_t i, std::size_t j) const {
    return l_[i * (k_ + 1) + (j + k_ - i)];
  }
};

}  // namespace dkdv
