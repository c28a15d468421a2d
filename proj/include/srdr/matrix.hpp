#pragma once

#include <cstddef>
#include <vector>

#include "srdr/errors.hpp"

namespace srdr {

using Vector = std::vector<double>;

// Dense matrix with row-major storage. Rows or columns may be zero; a matrix
// with either extent zero is "empty" and participates in products as the
// natural degenerate case (e.g. an m x 0 factor contributes nothing).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }
  const std::vector<double>& entries() const { return entries_; }
  std::vector<double>& entries() { return entries_; }

  Vector row(std::size_t i) const;
  Vector col(std::size_t j) const;
  void set_row(std::size_t i, const Vector& v);
  void set_col(std::size_t j, const Vector& v);
  // Columns j0..j0+count-1 as a new matrix; count may be zero.
  Matrix cols_range(std::size_t j0, std::size_t count) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Shared inner kernels. All higher-level evaluation paths (plain network
// evaluation and tape replay) route through these so that the same
// computation produces bit-identical floating-point results everywhere.
void matvec_into(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* out);
void matvec_t_into(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, double* out);

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
// aᵀ·x without forming the transpose.
Vector matvec_t(const Matrix& a, const Vector& x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);
Matrix outer(const Vector& u, const Vector& v);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(double c, const Vector& a);
double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const Vector& a, const Vector& b);

bool is_finite(const Vector& a);
bool is_finite(const Matrix& a);

}  // namespace srdr
