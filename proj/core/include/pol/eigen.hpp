#pragma once

// Small dense real matrices and their eigenvalues (balancing, Hessenberg
// reduction by stabilized elimination, Francis double-shift QR).

#include <complex>
#include <cstddef>
#include <random>
#include <vector>

namespace pol {

struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;  // row-major n x n

  Matrix() = default;
  explicit Matrix(std::size_t size, double fill = 0.0) : n(size), a(size * size, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  static Matrix identity(std::size_t size);
  static Matrix uniform(std::size_t size, double lo, double hi, std::mt19937_64& rng);
  bool all_finite() const;
};

Matrix matmul(const Matrix& x, const Matrix& y);
Matrix add(const Matrix& x, const Matrix& y);
// x^k by repeated multiplication (k multiplications, left to right).
Matrix matrix_power(const Matrix& x, int k);

// All n eigenvalues, unordered. Throws NumericError if QR fails to converge.
std::vector<std::complex<double>> eigenvalues(Matrix m);

double spectral_radius(const Matrix& m);

}  // namespace pol
