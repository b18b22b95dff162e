#pragma once
// Small dense matrix helpers for the cold paths: LU solves, Kronecker
// products and a real eigenvalue solver (balance + Hessenberg + Francis QR).
// Desk scale only; nothing here is performance critical.

#include <complex>
#include <cstddef>
#include <vector>

namespace kaf {

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Mat transposed() const;
  Mat operator*(const Mat& o) const;
  Mat operator+(const Mat& o) const;
  Mat operator-(const Mat& o) const;
  std::vector<double> operator*(const std::vector<double>& v) const;

  double frobenius_norm() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Solve A x = b by LU with partial pivoting.  Throws std::runtime_error on a
// numerically singular pivot.
std::vector<double> lu_solve(Mat a, std::vector<double> b);

// Ratio of largest to smallest pivot magnitude from the LU factorization;
// a cheap condition estimate used to decide when to add a ridge.
double lu_condition_estimate(Mat a);

Mat kronecker(const Mat& a, const Mat& b);

// All eigenvalues of a real square matrix (m <= 64).
std::vector<std::complex<double>> eigenvalues(Mat a);

} // namespace kaf
