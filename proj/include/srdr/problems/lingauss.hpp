#pragma once

#include <cstdint>

#include "srdr/matrix.hpp"
#include "srdr/samples.hpp"

namespace srdr {

// Linear-Gaussian benchmark: X ~ N(0, I_n), Y = AX + eps with
// eps ~ N(0, Gamma). The prior is the reference measure, so the score ratio
// and both diagnostic matrices have closed forms:
//
//   w(x,y) = A' Gamma^-1 (y - Ax)
//   H^X    = A' Gamma^-1 A          (E[(y-Ax)(y-Ax)'] = Gamma)
//   H^Y    = Gamma^-1 A A' Gamma^-1 (grad_y w constant)
struct LinGaussProblem {
  Matrix a;          // m x n forward map
  Matrix gamma;      // m x m noise covariance
  Matrix gamma_chol; // lower Cholesky factor, for sampling
  Matrix gamma_inv;
  Matrix at_gamma_inv;  // A' Gamma^-1, the constant observation gradient
};

// Validates shapes and factorizes Gamma. Throws NotPositiveDefinite if
// Gamma is not symmetric positive definite.
LinGaussProblem make_lingauss(const Matrix& a, const Matrix& gamma);

// Draw j uses its own substream derived from (seed, draw, j), so any prefix
// of a sample set is independent of the total count and draws could be
// filled in parallel.
JointSamples sample_lingauss(const LinGaussProblem& p, std::size_t count,
                             std::uint64_t seed);

Vector lingauss_true_ratio(const LinGaussProblem& p, const Vector& x,
                           const Vector& y);

DiagnosticMatrix lingauss_true_hx(const LinGaussProblem& p);
DiagnosticMatrix lingauss_true_hy(const LinGaussProblem& p);

// Data-averaged KL divergence E_Y[KL(posterior || reduced posterior)] where
// the reduced posterior conditions the likelihood on U_r U_r' x. All
// distributions are Gaussian, so the average has a closed form; it is the
// quantity the certified bound 1/2 Tr((I - U_r U_r') H^X) controls.
// Throws NotOrthonormal unless u_r has orthonormal columns (r may be 0).
double lingauss_avg_kl(const LinGaussProblem& p, const Matrix& u_r);

}  // namespace srdr
