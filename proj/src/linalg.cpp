#include "srdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace srdr {

namespace {

// Frobenius norm of the off-diagonal part.
double off_diagonal_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

// Largest-magnitude component positive; ties broken by lowest index.
void fix_column_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.rows(); ++i)
      if (std::fabs(v(i, j)) > std::fabs(v(best, j))) best = i;
    if (v.rows() > 0 && v(best, j) < 0.0)
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  }
}

}  // namespace

EigenPairs sym_eigendecompose(const Matrix& m, double tol,
                              std::size_t max_sweeps) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("sym_eigendecompose: square input required");
  if (tol <= 0.0)
    throw DimensionMismatch("sym_eigendecompose: tol must be positive");
  const std::size_t d = m.rows();
  if (d == 0) return {{}, Matrix()};

  const double fro = frobenius_norm(m);
  double asym = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      asym = std::max(asym, std::fabs(m(i, j) - m(j, i)));
  if (asym > 1e-10 * fro)
    throw NonSymmetric("sym_eigendecompose: asymmetry " +
                       std::to_string(asym) + " exceeds 1e-10 relative");

  // Work on the symmetrized copy; within the tolerance above this changes
  // nothing beyond roundoff-level noise already present in the input.
  Matrix a = m;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
  Matrix v = Matrix::identity(d);

  const double thresh = tol * fro;
  bool converged = off_diagonal_norm(a) <= thresh;
  for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Classic stable rotation: t is the smaller-magnitude root of
        // t^2 + 2*theta*t - 1 = 0, which keeps the rotation angle <= pi/4.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 0.5 / theta;  // avoids overflow in theta * theta
        } else {
          t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = a(p, i) = aip - s * (aiq + tau * aip);
          a(i, q) = a(q, i) = aiq + s * (aip - tau * aiq);
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = vip - s * (viq + tau * vip);
          v(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
    converged = off_diagonal_norm(a) <= thresh;
  }
  if (!converged)
    throw NoConvergence("sym_eigendecompose: off-diagonal norm above " +
                        std::to_string(thresh) + " after " +
                        std::to_string(max_sweeps) + " sweeps");

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](std::size_t i, std::size_t j) {
                     return a(i, i) > a(j, j);
                   });

  EigenPairs out;
  out.values.resize(d);
  out.vectors = Matrix(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  fix_column_signs(out.vectors);
  return out;
}

SvdResult thin_svd(const Matrix& w) {
  if (w.empty()) throw DimensionMismatch("thin_svd: empty input");
  if (w.rows() < w.cols()) {
    // Decompose the transpose and swap the factors.
    SvdResult s = thin_svd(transpose(w));
    return {std::move(s.right), std::move(s.singulars), std::move(s.left)};
  }

  const std::size_t c = w.cols();
  const Matrix gram = matmul(transpose(w), w);
  EigenPairs eig = sym_eigendecompose(gram);

  // Gram eigenvalues resolve small singular values only to sqrt(eps) * s_max;
  // measuring ||w * v_i|| instead recovers them to eps * s_max, which keeps
  // exactly rank-deficient inputs below the 1e-12 rank cutoff.
  std::vector<double> sigma(c);
  std::vector<Vector> images(c);
  for (std::size_t i = 0; i < c; ++i) {
    images[i] = matvec(w, eig.vectors.col(i));
    sigma[i] = norm(images[i]);
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&sigma](std::size_t a,
                                                        std::size_t b) {
    return sigma[a] > sigma[b];
  });

  SvdResult out;
  out.singulars.resize(c);
  out.right = Matrix(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    out.singulars[i] = sigma[order[i]];
    out.right.set_col(i, eig.vectors.col(order[i]));
  }

  const double cutoff = 1e-12 * (c > 0 ? out.singulars[0] : 0.0);
  out.left = Matrix(w.rows(), c);
  for (std::size_t i = 0; i < c; ++i) {
    if (out.singulars[i] > cutoff && out.singulars[i] > 0.0) {
      out.left.set_col(i, scale(1.0 / out.singulars[i], images[order[i]]));
    } else {
      // Zero singular value: complete with a canonical direction made
      // orthonormal against the columns already placed.
      for (std::size_t k = 0; k < w.rows(); ++k) {
        Vector u(w.rows(), 0.0);
        u[k] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
          const Vector uj = out.left.col(j);
          const double proj = dot(uj, u);
          for (std::size_t t = 0; t < u.size(); ++t) u[t] -= proj * uj[t];
        }
        const double nu = norm(u);
        if (nu > 0.5) {
          out.left.set_col(i, scale(1.0 / nu, u));
          break;
        }
      }
    }
  }
  return out;
}

std::size_t svd_rank(const SvdResult& s) {
  if (s.singulars.empty()) return 0;
  const double cutoff = 1e-12 * s.singulars[0];
  std::size_t r = 0;
  while (r < s.singulars.size() && s.singulars[r] > cutoff &&
         s.singulars[r] > 0.0)
    ++r;
  return r;
}

QrResult householder_qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DimensionMismatch("householder_qr: rows < cols");
  if (n == 0) return {Matrix(m, 0), Matrix(0, 0)};

  Matrix work = a;
  Matrix vs(m, n);  // column k holds the k-th unit reflector
  for (std::size_t k = 0; k < n; ++k) {
    double sigma = 0.0;
    for (std::size_t i = k; i < m; ++i) sigma += work(i, k) * work(i, k);
    sigma = std::sqrt(sigma);
    if (sigma == 0.0) continue;  // column already zero below the diagonal

    const double alpha = work(k, k) >= 0.0 ? -sigma : sigma;
    Vector v(m, 0.0);
    v[k] = work(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i] = work(i, k);
    const double nv = norm(v);
    for (std::size_t i = k; i < m; ++i) v[i] /= nv;

    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * work(i, j);
      for (std::size_t i = k; i < m; ++i) work(i, j) -= 2.0 * v[i] * s;
    }
    vs.set_col(k, v);
  }

  // Accumulate the thin Q by applying the reflectors, last first, to the
  // leading n columns of the identity.
  Matrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    const Vector v = vs.col(k);
    double nv = 0.0;
    for (std::size_t i = k; i < m; ++i) nv += v[i] * v[i];
    if (nv == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * q(i, j);
      for (std::size_t i = k; i < m; ++i) q(i, j) -= 2.0 * v[i] * s;
    }
  }

  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);

  // Normalize to a nonnegative diagonal of R so the factorization is unique.
  for (std::size_t k = 0; k < n; ++k) {
    if (r(k, k) < 0.0) {
      for (std::size_t j = k; j < n; ++j) r(k, j) = -r(k, j);
      for (std::size_t i = 0; i < m; ++i) q(i, k) = -q(i, k);
    }
  }
  return {std::move(q), std::move(r)};
}

Matrix random_rotation(std::size_t d, SeededRng& rng) {
  if (d == 0) throw DimensionMismatch("random_rotation: d must be >= 1");
  return householder_qr(rng.gaussian_matrix(d, d)).q;
}

Matrix cholesky(const Matrix& spd) {
  if (spd.rows() != spd.cols())
    throw NotPositiveDefinite("cholesky: square input required");
  const std::size_t n = spd.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw NotPositiveDefinite("cholesky: nonpositive pivot at index " +
                                std::to_string(j));
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Vector cholesky_solve(const Matrix& lower, const Vector& b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw DimensionMismatch("cholesky_solve: lengths");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
    y[i] = s / lower(i, i);
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= lower(k, i) * x[k];
    x[i] = s / lower(i, i);
  }
  return x;
}

Matrix spd_solve(const Matrix& spd, const Matrix& rhs) {
  if (spd.rows() != rhs.rows()) throw DimensionMismatch("spd_solve: extents");
  const Matrix l = cholesky(spd);
  Matrix x(rhs.rows(), rhs.cols());
  for (std::size_t j = 0; j < rhs.cols(); ++j)
    x.set_col(j, cholesky_solve(l, rhs.col(j)));
  return x;
}

Matrix spd_inverse(const Matrix& spd) {
  return spd_solve(spd, Matrix::identity(spd.rows()));
}

double spd_logdet(const Matrix& spd) {
  const Matrix l = cholesky(spd);
  double acc = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

double lu_det(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("lu_det: square required");
  const std::size_t n = a.rows();
  Matrix u = a;
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(u(i, k)) > std::fabs(u(piv, k))) piv = i;
    if (u(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(u(k, j), u(piv, j));
      det = -det;
    }
    det *= u(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = u(i, k) / u(k, k);
      for (std::size_t j = k; j < n; ++j) u(i, j) -= f * u(k, j);
    }
  }
  return det;
}

double principal_angle(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw DimensionMismatch("principal_angle: shapes must agree");
  if (u.cols() == 0) return 0.0;
  const SvdResult s = thin_svd(matmul(transpose(u), v));
  const double sigma_min = std::min(s.singulars.back(), 1.0);
  return std::acos(sigma_min);
}

bool has_orthonormal_columns(const Matrix& u, double tol) {
  if (u.cols() == 0) return true;
  const Matrix g = matmul(transpose(u), u);
  return max_abs_diff(g, Matrix::identity(u.cols())) <= tol;
}

BandedSpdSolver::BandedSpdSolver(std::size_t n, std::size_t half_bandwidth)
    : n_(n), hbw_(half_bandwidth), band_(n * (half_bandwidth + 1), 0.0) {}

double& BandedSpdSolver::at(std::size_t i, std::size_t j) {
  if (i >= n_ || j > i || i - j > hbw_)
    throw DimensionMismatch("BandedSpdSolver::at: index outside band");
  return band_[i * (hbw_ + 1) + (i - j)];
}

void BandedSpdSolver::factor() {
  // In-place banded Cholesky; the band buffer is overwritten with L.
  auto l = [this](std::size_t i, std::size_t j) -> double& {
    return band_[i * (hbw_ + 1) + (i - j)];
  };
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t k0 = j > hbw_ ? j - hbw_ : 0;
    double diag = l(j, j);
    for (std::size_t k = k0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw SolveFailure("banded Cholesky: nonpositive pivot at index " +
                         std::to_string(j));
    l(j, j) = std::sqrt(diag);
    const std::size_t imax = std::min(n_ - 1, j + hbw_);
    for (std::size_t i = j + 1; i <= imax; ++i) {
      const std::size_t ik0 = i > hbw_ ? i - hbw_ : 0;
      double s = l(i, j);
      for (std::size_t k = ik0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  factored_ = true;
}

Vector BandedSpdSolver::solve(const Vector& rhs) const {
  if (!factored_) throw SolveFailure("BandedSpdSolver::solve before factor");
  if (rhs.size() != n_) throw DimensionMismatch("BandedSpdSolver::solve");
  auto l = [this](std::size_t i, std::size_t j) {
    return band_[i * (hbw_ + 1) + (i - j)];
  };
  Vector y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t k0 = i > hbw_ ? i - hbw_ : 0;
    double s = rhs[i];
    for (std::size_t k = k0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vector x(n_);
  for (std::size_t i = n_; i-- > 0;) {
    const std::size_t kmax = std::min(n_ - 1, i + hbw_);
    double s = y[i];
    for (std::size_t k = i + 1; k <= kmax; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

}  // namespace srdr
