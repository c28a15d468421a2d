#include "srdr/matrix.hpp"

#include <cmath>
#include <string>

namespace srdr {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(op) + ": shapes " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionMismatch("Matrix: entry count " +
                            std::to_string(entries_.size()) +
                            " does not match " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::row(std::size_t i) const {
  Vector v(cols_);
  for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
  return v;
}

Vector Matrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_row(std::size_t i, const Vector& v) {
  if (v.size() != cols_) throw DimensionMismatch("set_row: length mismatch");
  for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
}

void Matrix::set_col(std::size_t j, const Vector& v) {
  if (v.size() != rows_) throw DimensionMismatch("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::cols_range(std::size_t j0, std::size_t count) const {
  if (j0 + count > cols_) throw DimensionMismatch("cols_range: out of range");
  Matrix m(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) m(i, j) = (*this)(i, j0 + j);
  return m;
}

void matvec_into(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    const double* wi = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) acc += wi[j] * x[j];
    out[i] = acc;
  }
}

void matvec_t_into(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, double* out) {
  for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* wi = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += wi[j] * x[i];
  }
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner extents");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matvec: extents");
  Vector y(a.rows());
  matvec_into(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Vector matvec_t(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size()) throw DimensionMismatch("matvec_t: extents");
  Vector y(a.cols());
  matvec_t_into(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix c = a;
  for (std::size_t k = 0; k < c.entries().size(); ++k)
    c.entries()[k] += b.entries()[k];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c = a;
  for (std::size_t k = 0; k < c.entries().size(); ++k)
    c.entries()[k] -= b.entries()[k];
  return c;
}

Matrix operator*(double c, const Matrix& a) {
  Matrix b = a;
  for (double& e : b.entries()) e *= c;
  return b;
}

Matrix outer(const Vector& u, const Vector& v) {
  Matrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("add: lengths");
  Vector c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Vector sub(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("sub: lengths");
  Vector c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Vector scale(double c, const Vector& a) {
  Vector b = a;
  for (double& e : b) e *= c;
  return b;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

double trace(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("trace: square required");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, i);
  return acc;
}

double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double e : a.entries()) acc += e * e;
  return std::sqrt(acc);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double e : a.entries()) m = std::max(m, std::fabs(e));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k)
    m = std::max(m, std::fabs(a.entries()[k] - b.entries()[k]));
  return m;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("max_abs_diff: lengths");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

bool is_finite(const Vector& a) {
  for (double e : a)
    if (!std::isfinite(e)) return false;
  return true;
}

bool is_finite(const Matrix& a) { return is_finite(a.entries()); }

}  // namespace srdr
