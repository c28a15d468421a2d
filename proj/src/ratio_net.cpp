#include "srdr/ratio_net.hpp"

#include <cmath>

#include "srdr/errors.hpp"
#include "srdr/linalg.hpp"

namespace srdr {

void validate_network(const ScoreRatioNetwork& net) {
  const std::size_t n = net.n(), rp = net.r_prime();
  const std::size_t m = net.m(), sp = net.s_prime();
  if (rp < 1 || rp > n)
    throw DimensionMismatch("network requires 1 <= r' <= n");
  if (sp > m) throw DimensionMismatch("network requires s' <= m");
  validate_mlp(net.psi);
  if (net.psi.input_width() != rp + sp || net.psi.output_width() != rp)
    throw DimensionMismatch("psi must map r'+s' to r'");
  if (!is_finite(net.w_x) || !is_finite(net.w_y))
    throw DimensionMismatch("network ridge matrices must be finite");
}

ScoreRatioNetwork init_network(std::size_t n, std::size_t m,
                               const NetworkConfig& config, SeededRng& rng) {
  const std::size_t rp = config.r_prime, sp = config.s_prime;
  if (rp < 1 || rp > n)
    throw InvalidConfig("init_network requires 1 <= r' <= n");
  if (sp > m) throw InvalidConfig("init_network requires s' <= m");
  ScoreRatioNetwork net;
  net.w_x = householder_qr(rng.gaussian_matrix(n, rp)).q;
  net.w_y = sp > 0 ? householder_qr(rng.gaussian_matrix(m, sp)).q
                   : Matrix(m, 0);
  net.psi = init_mlp(rp + sp, config.hidden_layers, config.hidden_width, rp,
                     rng);
  validate_network(net);
  return net;
}

Vector reduced_coordinates(const ScoreRatioNetwork& net, const Vector& x,
                           const Vector& y) {
  Vector zx = matvec_t(net.w_x, x);
  const Vector zy = matvec_t(net.w_y, y);
  zx.insert(zx.end(), zy.begin(), zy.end());
  return zx;
}

Vector ridge_forward(const ScoreRatioNetwork& net, const Vector& x,
                     const Vector& y) {
  return matvec(net.w_x, mlp_forward(net.psi, reduced_coordinates(net, x, y)));
}

Matrix reduced_input_jacobian(const ScoreRatioNetwork& net, const Vector& x,
                              const Vector& y) {
  const std::size_t rp = net.r_prime();
  const Vector z = reduced_coordinates(net, x, y);
  Matrix j(rp, rp);
  Vector seed(z.size(), 0.0);
  for (std::size_t i = 0; i < rp; ++i) {
    seed[i] = 1.0;
    j.set_col(i, mlp_jvp(net.psi, z, seed).tangent);
    seed[i] = 0.0;
  }
  return j;
}

namespace {

// Tr(S J) without forming the product.
double trace_product(const Matrix& s, const Matrix& j) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t k = 0; k < s.cols(); ++k) acc += s(i, k) * j(k, i);
  return acc;
}

}  // namespace

double input_jacobian_trace(const ScoreRatioNetwork& net, const Vector& x,
                            const Vector& y) {
  const Matrix gram = matmul(transpose(net.w_x), net.w_x);
  return trace_product(gram, reduced_input_jacobian(net, x, y));
}

Matrix observation_gradient(const ScoreRatioNetwork& net, const Vector& x,
                            const Vector& y) {
  const std::size_t rp = net.r_prime(), sp = net.s_prime();
  const Vector z = reduced_coordinates(net, x, y);
  Matrix g(rp, sp);
  Vector seed(z.size(), 0.0);
  for (std::size_t j = 0; j < sp; ++j) {
    seed[rp + j] = 1.0;
    g.set_col(j, mlp_jvp(net.psi, z, seed).tangent);
    seed[rp + j] = 0.0;
  }
  return matmul(matmul(net.w_x, g), transpose(net.w_y));
}

std::size_t network_param_count(const ScoreRatioNetwork& net) {
  return net.w_x.entries().size() + net.w_y.entries().size() +
         net.psi.param_count();
}

Vector flatten_network(const ScoreRatioNetwork& net) {
  Vector flat;
  flat.reserve(network_param_count(net));
  flat.insert(flat.end(), net.w_x.entries().begin(), net.w_x.entries().end());
  flat.insert(flat.end(), net.w_y.entries().begin(), net.w_y.entries().end());
  const Vector psi = flatten_mlp(net.psi);
  flat.insert(flat.end(), psi.begin(), psi.end());
  return flat;
}

void unflatten_network(const Vector& flat, ScoreRatioNetwork* net) {
  if (flat.size() != network_param_count(*net))
    throw DimensionMismatch("flat parameter vector has the wrong length");
  std::size_t off = 0;
  for (double& e : net->w_x.entries()) e = flat[off++];
  for (double& e : net->w_y.entries()) e = flat[off++];
  unflatten_mlp(flat, off, &net->psi);
}

bool is_orthogonal_projector(const Matrix& p, double tol) {
  if (p.rows() != p.cols()) return false;
  if (max_abs_diff(p, transpose(p)) > tol) return false;
  return max_abs_diff(matmul(p, p), p) <= tol;
}

DeflatedNetwork deflate_network(const ScoreRatioNetwork& net,
                                const Matrix& proj_x, const Matrix& proj_y) {
  if (proj_x.rows() != net.n() || !is_orthogonal_projector(proj_x))
    throw NotProjector("proj_x must be an n x n orthogonal projector");
  if (proj_y.rows() != net.m() || !is_orthogonal_projector(proj_y))
    throw NotProjector("proj_y must be an m x m orthogonal projector");
  return DeflatedNetwork{net, proj_x, proj_y};
}

Vector deflated_forward(const DeflatedNetwork& net, const Vector& x,
                        const Vector& y) {
  return matvec(net.proj_x,
                ridge_forward(net.inner, x, matvec(net.proj_y, y)));
}

double deflated_input_jacobian_trace(const DeflatedNetwork& net,
                                     const Vector& x, const Vector& y) {
  // Tr(P W_x J W_x' P) = Tr(W_x' P W_x J) because P is idempotent.
  const Matrix sandwich =
      matmul(transpose(net.inner.w_x), matmul(net.proj_x, net.inner.w_x));
  const Matrix j =
      reduced_input_jacobian(net.inner, x, matvec(net.proj_y, y));
  return trace_product(sandwich, j);
}

Matrix deflated_observation_gradient(const DeflatedNetwork& net,
                                     const Vector& x, const Vector& y) {
  const Matrix inner =
      observation_gradient(net.inner, x, matvec(net.proj_y, y));
  return matmul(net.proj_x, matmul(inner, net.proj_y));
}

}  // namespace srdr
