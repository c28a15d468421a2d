#pragma once

#include <cstddef>

#include "srdr/matrix.hpp"
#include "srdr/mlp.hpp"
#include "srdr/rng.hpp"

namespace srdr {

// Architecture sizes for the structured score-ratio network
// w(x,y) = W_x psi(W_x' x, W_y' y). r_prime and s_prime cap the ranks of the
// diagnostic matrices the network can express.
struct NetworkConfig {
  std::size_t r_prime = 1;
  std::size_t s_prime = 0;
  std::size_t hidden_layers = 2;
  std::size_t hidden_width = 32;
};

// The ridge-structured network. W_x (n x r') compresses the parameter, W_y
// (m x s') compresses the observation, psi maps the r'+s' reduced
// coordinates back to r' ridge coefficients.
struct ScoreRatioNetwork {
  Matrix w_x;
  Matrix w_y;
  MlpParams psi;

  std::size_t n() const { return w_x.rows(); }
  std::size_t m() const { return w_y.rows(); }
  std::size_t r_prime() const { return w_x.cols(); }
  std::size_t s_prime() const { return w_y.cols(); }
};

// Checks r' <= n (r' >= 1), s' <= m, psi widths r'+s' -> r', and finiteness
// of every entry. Throws DimensionMismatch.
void validate_network(const ScoreRatioNetwork& net);

// W_x and W_y get orthonormal columns (QR of a Gaussian draw), so the
// reduced coordinates start at unit scale. psi is fan-in initialized with a
// zero final layer: the initial score ratio is identically zero, matching
// the reference measure. Draw order: W_x, W_y, psi.
// Throws InvalidConfig on r' < 1, r' > n, or s' > m.
ScoreRatioNetwork init_network(std::size_t n, std::size_t m,
                               const NetworkConfig& config, SeededRng& rng);

// concat(W_x' x, W_y' y), length r'+s'.
Vector reduced_coordinates(const ScoreRatioNetwork& net, const Vector& x,
                           const Vector& y);

// w(x,y) = W_x psi(W_x' x, W_y' y); always lies in the column span of W_x.
Vector ridge_forward(const ScoreRatioNetwork& net, const Vector& x,
                     const Vector& y);

// J_psi = d psi / d(first r' inputs) at the reduced coordinates, assembled
// column by column from r' forward-mode passes. The full input Jacobian of
// ridge_forward is W_x J_psi W_x', so its trace is Tr(W_x' W_x J_psi).
Matrix reduced_input_jacobian(const ScoreRatioNetwork& net, const Vector& x,
                              const Vector& y);

// Tr(W_x' W_x J_psi): exact trace of the n x n input Jacobian at r' cost.
double input_jacobian_trace(const ScoreRatioNetwork& net, const Vector& x,
                            const Vector& y);

// d(ridge_forward)/dy = W_x (d psi / d last s' inputs) W_y', an n x m
// matrix, from s' forward-mode passes.
Matrix observation_gradient(const ScoreRatioNetwork& net, const Vector& x,
                            const Vector& y);

std::size_t network_param_count(const ScoreRatioNetwork& net);

// Flat parameter order: W_x row-major, W_y row-major, psi layer-major with
// weights before biases. Shared by the trainer, checkpoints, and gradient
// assembly.
Vector flatten_network(const ScoreRatioNetwork& net);
void unflatten_network(const Vector& flat, ScoreRatioNetwork* net);

// Symmetric and idempotent within tol, entrywise.
bool is_orthogonal_projector(const Matrix& p, double tol = 1e-10);

// Score ratio of the partially reduced posterior: the inner network
// evaluated at (x, proj_y y) with the output projected by proj_x. Traces
// sandwich the input Jacobian with proj_x on both sides (which collapses to
// a single application since proj_x is idempotent); observation gradients
// pick up a right factor of proj_y by the chain rule.
struct DeflatedNetwork {
  ScoreRatioNetwork inner;
  Matrix proj_x;
  Matrix proj_y;
};

// Throws NotProjector unless proj_x is n x n, proj_y is m x m, and both are
// orthogonal projectors within 1e-10.
DeflatedNetwork deflate_network(const ScoreRatioNetwork& net,
                                const Matrix& proj_x, const Matrix& proj_y);

Vector deflated_forward(const DeflatedNetwork& net, const Vector& x,
                        const Vector& y);
double deflated_input_jacobian_trace(const DeflatedNetwork& net,
                                     const Vector& x, const Vector& y);
Matrix deflated_observation_gradient(const DeflatedNetwork& net,
                                     const Vector& x, const Vector& y);

}  // namespace srdr
