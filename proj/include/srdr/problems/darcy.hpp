#pragma once

#include <cstdint>
#include <vector>

#include "srdr/matrix.hpp"
#include "srdr/samples.hpp"

namespace srdr {

// Pressure observation location in the open unit square.
struct ObsPoint {
  double xi1 = 0.0;
  double xi2 = 0.0;
};

// Groundwater flow on [0, 1]^2. The log-permeability is expanded in the
// leading Karhunen-Loeve modes of the prior covariance (delta I - gamma
// Laplacian)^-2; the pressure solves div(e^rho grad u) = 0 with u = 0 on the
// bottom edge, u = 1 on the top edge, and zero flux through the left and
// right edges. Observations are pressure values at interior points plus
// Gaussian noise.
//
// Grid layout used throughout: nodes per side `grid`, spacing
// h = 1/(grid - 1); a nodal field is a grid x grid matrix indexed
// (row, col) = (xi2 / h, xi1 / h); the flattened node id is row * grid + col.
struct DarcyProblem {
  std::size_t grid = 17;
  std::size_t n_kl = 16;
  double delta = 0.5;
  double gamma = 0.1;
  std::vector<ObsPoint> observations;
  double noise_variance = 1e-3;

  // Filled by make_darcy from kl_modes.
  Matrix kl_modes_nodal;   // grid^2 x n_kl, unit-normalized columns
  Vector kl_eigenvalues;   // descending
};

// Uniform 3 x 3 grid on [0.1, 0.9]^2, ordered xi2-major.
std::vector<ObsPoint> default_observation_grid();

// Validates the raw fields (grid >= 3, n_kl >= 1, delta and gamma positive,
// noise variance nonnegative, observations strictly inside the unit square),
// throwing InvalidConfig.
void validate_darcy(const DarcyProblem& p);

// Eigenpairs of the prior covariance: Neumann cosine modes
// cos(pi k xi1) cos(pi l xi2) sampled at the nodes and normalized to unit
// Euclidean norm, with eigenvalues (delta + gamma pi^2 (k^2 + l^2))^-2,
// sorted descending (ties broken by (k, l)) and truncated at n_kl.
struct KlModes {
  Vector eigenvalues;
  Matrix modes;  // grid^2 x n_kl
};

KlModes kl_modes(const DarcyProblem& p);

DarcyProblem make_darcy();  // all defaults
DarcyProblem make_darcy(std::size_t grid, std::size_t n_kl, double delta,
                        double gamma, std::vector<ObsPoint> observations,
                        double noise_variance);

// Five-point conservative finite differences with harmonic face averaging
// of the nodal permeability e^field. Dirichlet rows are eliminated; the
// banded Cholesky solution is checked to satisfy the flux balance within
// 1e-10 relative. Returns the full nodal pressure including the boundary
// rows. Throws DimensionMismatch (field not grid x grid), SolveFailure.
Matrix solve_darcy(const DarcyProblem& p, const Matrix& log_permeability);

// Bilinear interpolation of a nodal field at an interior point.
double interpolate_nodal(const Matrix& field, double xi1, double xi2);

// Noiseless observation map: KL coefficients -> log-permeability field ->
// pressure -> values at the observation points.
Vector darcy_forward(const DarcyProblem& p, const Vector& x);

// x ~ N(0, I_{n_kl}); y = forward(x) + noise. Draw j owns the substream
// (seed, draw, j): coefficients first, then the observation noise.
JointSamples sample_darcy(const DarcyProblem& p, std::size_t count,
                          std::uint64_t seed);

}  // namespace srdr
