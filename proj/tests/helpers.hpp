#pragma once

#include <cmath>
#include <functional>

#include "srdr/linalg.hpp"
#include "srdr/matrix.hpp"
#include "srdr/mlp.hpp"
#include "srdr/ratio_net.hpp"
#include "srdr/rng.hpp"

namespace srdr::testing {

inline double rel_frobenius_error(const Matrix& got, const Matrix& want) {
  const double denom = frobenius_norm(want);
  return frobenius_norm(got - want) / (denom > 0.0 ? denom : 1.0);
}

// Symmetric positive semidefinite matrix gᵀg from a square Gaussian factor.
inline Matrix random_psd(std::size_t d, SeededRng& rng) {
  const Matrix g = rng.gaussian_matrix(d, d);
  return matmul(transpose(g), g);
}

// Symmetric matrix with prescribed eigenvalues: q diag(values) qᵀ for a
// Haar-random rotation q.
inline Matrix symmetric_with_spectrum(const Vector& values, SeededRng& rng,
                                      Matrix* q_out = nullptr) {
  const std::size_t d = values.size();
  const Matrix q = random_rotation(d, rng);
  Matrix scaled = q;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) scaled(i, j) *= values[j];
  if (q_out) *q_out = q;
  return matmul(scaled, transpose(q));
}

inline double degrees(double radians) {
  return radians * 180.0 / 3.14159265358979323846;
}

// Network with every layer (including the normally zero-initialized final
// one) filled with Gaussians, so outputs and Jacobians are generically
// nonzero.
inline MlpParams random_mlp(std::size_t in, std::size_t hidden_layers,
                            std::size_t hidden_width, std::size_t out,
                            SeededRng& rng) {
  MlpParams p = init_mlp(in, hidden_layers, hidden_width, out, rng);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(p.weights[l].cols()));
    for (double& e : p.weights[l].entries()) e = s * rng.gaussian();
    for (double& e : p.biases[l]) e = 0.1 * rng.gaussian();
  }
  return p;
}

inline ScoreRatioNetwork random_network(std::size_t n, std::size_t m,
                                        const NetworkConfig& cfg,
                                        SeededRng& rng) {
  ScoreRatioNetwork net = init_network(n, m, cfg, rng);
  net.psi = random_mlp(cfg.r_prime + cfg.s_prime, cfg.hidden_layers,
                       cfg.hidden_width, cfg.r_prime, rng);
  return net;
}

inline double central_fd(const std::function<double(const Vector&)>& f,
                         const Vector& at, std::size_t k, double h) {
  Vector plus = at, minus = at;
  plus[k] += h;
  minus[k] -= h;
  return (f(plus) - f(minus)) / (2.0 * h);
}

inline double cosine_similarity(const Vector& a, const Vector& b) {
  return dot(a, b) / (norm(a) * norm(b));
}

// Per-coordinate comparison against central differences; coordinates with
// tiny analytic gradient are only required to have tiny FD estimates.
// Requires doctest.h to be included first.
inline void check_grad_against_fd(const Vector& grad,
                                  const std::function<double(const Vector&)>& f,
                                  const Vector& at, double rel_tol) {
  REQUIRE(grad.size() == at.size());
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double fd = central_fd(f, at, k, 1e-5);
    if (std::fabs(grad[k]) > 1e-8) {
      CHECK(std::fabs(grad[k] - fd) <=
            rel_tol * std::max(std::fabs(fd), std::fabs(grad[k])));
    } else {
      CHECK(std::fabs(fd) < 1e-6);
    }
  }
}

}  // namespace srdr::testing
