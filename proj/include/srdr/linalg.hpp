#pragma once

#include "srdr/matrix.hpp"
#include "srdr/rng.hpp"

namespace srdr {

// Eigenvalues sorted descending with matching orthonormal columns. The sign
// of each vector is fixed so that its largest-magnitude component is
// positive (ties broken by lowest index), making bases comparable across
// runs up to the inherent sign ambiguity.
struct EigenPairs {
  std::vector<double> values;
  Matrix vectors;  // one column per eigenvalue, same order
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. `tol` bounds the
// final off-diagonal Frobenius norm relative to the input norm. Throws
// NonSymmetric if the input asymmetry exceeds 1e-10 relative, NoConvergence
// if `max_sweeps` full sweeps do not reach `tol`.
EigenPairs sym_eigendecompose(const Matrix& m, double tol = 1e-12,
                              std::size_t max_sweeps = 100);

struct SvdResult {
  Matrix left;                    // orthonormal columns
  std::vector<double> singulars;  // nonnegative, descending
  Matrix right;                   // orthonormal columns
};

// Thin SVD via eigendecomposition of the smaller Gram matrix. Columns of
// `left`/`right` paired with zero singular values are completed to an
// orthonormal set.
SvdResult thin_svd(const Matrix& w);

// Number of singular values above 1e-12 times the largest.
std::size_t svd_rank(const SvdResult& s);

struct QrResult {
  Matrix q;  // thin: rows(a) x cols(a), orthonormal columns
  Matrix r;  // cols(a) x cols(a), upper triangular, nonnegative diagonal
};

// Householder QR for rows >= cols. The decomposition is normalized so that
// diag(r) >= 0, which makes it unique for full-rank input.
QrResult householder_qr(const Matrix& a);

// Haar-distributed orthogonal matrix: QR of a square standard-Gaussian
// matrix with the positive-diagonal normalization.
Matrix random_rotation(std::size_t d, SeededRng& rng);

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& spd);
Vector cholesky_solve(const Matrix& lower, const Vector& b);
// Solutions of spd * X = rhs, column by column, via one Cholesky factor.
Matrix spd_solve(const Matrix& spd, const Matrix& rhs);
Matrix spd_inverse(const Matrix& spd);
double spd_logdet(const Matrix& spd);

// Determinant via LU with partial pivoting.
double lu_det(const Matrix& a);

// Largest principal angle (radians) between the column spans of two
// orthonormal bases with the same number of columns.
double principal_angle(const Matrix& u, const Matrix& v);

// True when uᵀu = I within `tol` entrywise. An empty basis passes.
bool has_orthonormal_columns(const Matrix& u, double tol = 1e-8);

// Symmetric positive definite banded system, stored by lower diagonals.
// Entries at(i, j) require j <= i and i - j <= half_bandwidth. factor()
// overwrites the band with its Cholesky factor; solve() may then be called
// repeatedly.
class BandedSpdSolver {
 public:
  BandedSpdSolver(std::size_t n, std::size_t half_bandwidth);

  double& at(std::size_t i, std::size_t j);
  void factor();  // throws SolveFailure on a nonpositive or nonfinite pivot
  Vector solve(const Vector& rhs) const;

 private:
  std::size_t n_;
  std::size_t hbw_;
  bool factored_ = false;
  std::vector<double> band_;  // band_[i * (hbw_ + 1) + (i - j)]
};

}  // namespace srdr
