#include "srdr/problems/lingauss.hpp"

#include "srdr/errors.hpp"
#include "srdr/linalg.hpp"
#include "srdr/rng.hpp"

namespace srdr {

LinGaussProblem make_lingauss(const Matrix& a, const Matrix& gamma) {
  if (a.rows() != gamma.rows())
    throw DimensionMismatch("forward map and noise covariance disagree");
  if (gamma.rows() != gamma.cols() ||
      max_abs_diff(gamma, transpose(gamma)) > 1e-10)
    throw NotPositiveDefinite("noise covariance must be symmetric");
  LinGaussProblem p;
  p.a = a;
  p.gamma = gamma;
  p.gamma_chol = cholesky(gamma);
  p.gamma_inv = spd_inverse(gamma);
  p.at_gamma_inv = matmul(transpose(a), p.gamma_inv);
  return p;
}

JointSamples sample_lingauss(const LinGaussProblem& p, std::size_t count,
                             std::uint64_t seed) {
  if (count < 1) throw InvalidConfig("sample count must be at least 1");
  const std::size_t n = p.a.cols(), m = p.a.rows();
  JointSamples s{Matrix(count, n), Matrix(count, m)};
  for (std::size_t j = 0; j < count; ++j) {
    SeededRng draw(derive_seed(seed, Stream::draw, j));
    const Vector x = draw.gaussian_vector(n);
    const Vector eps = draw.gaussian_vector(m);
    s.xs.set_row(j, x);
    s.ys.set_row(j, add(matvec(p.a, x), matvec(p.gamma_chol, eps)));
  }
  return s;
}

Vector lingauss_true_ratio(const LinGaussProblem& p, const Vector& x,
                           const Vector& y) {
  return matvec(p.at_gamma_inv, sub(y, matvec(p.a, x)));
}

DiagnosticMatrix lingauss_true_hx(const LinGaussProblem& p) {
  return DiagnosticMatrix{DiagnosticKind::cdr_parameter,
                          matmul(p.at_gamma_inv, p.a), 0};
}

DiagnosticMatrix lingauss_true_hy(const LinGaussProblem& p) {
  const Matrix gi_a = transpose(p.at_gamma_inv);  // Gamma^-1 A
  return DiagnosticMatrix{DiagnosticKind::cmi_observation,
                          matmul(gi_a, p.at_gamma_inv), 0};
}

namespace {

// trace(s^-1 m) through one Cholesky factorization of s.
double trace_solve(const Matrix& s, const Matrix& m) {
  const Matrix l = cholesky(s);
  double tr = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j)
    tr += cholesky_solve(l, m.col(j))[j];
  return tr;
}

}  // namespace

double lingauss_avg_kl(const LinGaussProblem& p, const Matrix& u_r) {
  const std::size_t n = p.a.cols();
  if (u_r.rows() != n)
    throw NotOrthonormal("basis rows must match the parameter dimension");
  if (!has_orthonormal_columns(u_r))
    throw NotOrthonormal("basis columns must be orthonormal");

  // Exact posterior: N(S_p A' Gamma^-1 y, S_p), S_p = (I + A'Gamma^-1 A)^-1.
  // Reduced posterior: same algebra with A_r = A U_r U_r'.
  const Matrix identity = Matrix::identity(n);
  const Matrix s_post = spd_inverse(identity + matmul(p.at_gamma_inv, p.a));

  const Matrix a_r = matmul(matmul(p.a, u_r), transpose(u_r));
  const Matrix ar_t_gi = matmul(transpose(a_r), p.gamma_inv);
  const Matrix s_red_inv = identity + matmul(ar_t_gi, a_r);
  const Matrix s_red = spd_inverse(s_red_inv);

  // Mean gap is linear in y: (mu_red - mu)(y) = D y, averaged against the
  // marginal E[yy'] = A A' + Gamma.
  const Matrix d =
      matmul(s_red, ar_t_gi) - matmul(s_post, p.at_gamma_inv);
  const Matrix s_y = matmul(p.a, transpose(p.a)) + p.gamma;
  const Matrix mean_term = matmul(matmul(d, s_y), transpose(d));

  const double kl = 0.5 * (trace_solve(s_red, s_post) -
                           static_cast<double>(n) +
                           trace_solve(s_red, mean_term) +
                           spd_logdet(s_red) - spd_logdet(s_post));
  // Rounding can leave a tiny negative residue when the bases coincide.
  return kl > 0.0 ? kl : 0.0;
}

}  // namespace srdr
