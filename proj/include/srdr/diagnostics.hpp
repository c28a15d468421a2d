#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "srdr/matrix.hpp"
#include "srdr/objective.hpp"
#include "srdr/ratio_net.hpp"
#include "srdr/samples.hpp"
#include "srdr/trainer.hpp"

namespace srdr {

// Gradient of the ratio with respect to the observation, as an n x m matrix.
using ObsGradFn = std::function<Matrix(const Vector& x, const Vector& y)>;

// Parameter diagnostic: (1/N) sum w w'. Symmetric PSD by construction.
// Throws EmptyBatch, DimensionMismatch (ratio output of the wrong length).
DiagnosticMatrix estimate_hx(const RatioFn& ratio, const JointSamples& samples);
DiagnosticMatrix estimate_hx(const ScoreRatioNetwork& net,
                             const JointSamples& samples);

// Observation diagnostic: (1/N) sum (grad_y w)' (grad_y w), an m x m matrix.
DiagnosticMatrix estimate_hy(const ObsGradFn& obs_grad,
                             const JointSamples& samples);
DiagnosticMatrix estimate_hy(const ScoreRatioNetwork& net,
                             const JointSamples& samples);

// Symmetry within 1e-10 relative and eigenvalue floor -1e-10 * lambda_1.
// Throws NonSymmetric / NotPositiveDefinite on violation.
void validate_diagnostic(const DiagnosticMatrix& diag);

// Smallest rank whose tail eigenvalue sum (halved for the CDR kind) falls
// below eps. Returns the full dimension with `warning` set when only the
// trivial full-rank choice satisfies the criterion. Preconditions (spectrum
// descending and nonnegative, eps > 0) are the caller's responsibility.
struct RankSelection {
  std::size_t rank = 0;
  bool warning = false;
};

RankSelection select_rank(const Vector& spectrum, double eps,
                          DiagnosticKind kind);

// Certified residuals of a candidate basis u against a reference diagnostic:
// (1/2) Tr((I - UU')H) for the CDR kind, Tr((I - VV')H) for CMI. Equals the
// (scaled) tail eigenvalue sum when the basis spans the leading eigenspace.
// Throws NotOrthonormal, DimensionMismatch.
double error_bound_cdr(const Matrix& u, const Matrix& h_true);
double error_bound_cmi(const Matrix& v, const Matrix& h_true);

// Leading eigenbasis of a diagnostic with the rank chosen by select_rank.
// spectrum holds all eigenvalues descending; residual_bound is the selected
// rank's tail criterion value.
struct ReductionBasis {
  Matrix basis;
  Vector spectrum;
  std::size_t rank = 0;
  double residual_bound = 0.0;
  bool rank_warning = false;
};

ReductionBasis reduce_from_diagnostic(const DiagnosticMatrix& diag,
                                      double eps);

// Single-network procedure: train on the joint samples, estimate both
// diagnostics with the trained ratio, eigendecompose, select ranks.
// Diagnostics are estimated on the full sample set unless
// diagnostics_on_holdout is set, which restricts them to the trainer's
// validation rows (InvalidConfig when the validation fraction is zero).
struct Algorithm1Result {
  ReductionBasis x_basis;
  ReductionBasis y_basis;  // degenerate (empty spectrum) when m = 0
  DiagnosticMatrix hx;
  DiagnosticMatrix hy;
  ScoreRatioNetwork net;
  TrainReport report;
};

Algorithm1Result algorithm1(const JointSamples& samples,
                            const NetworkConfig& net_cfg,
                            const TrainConfig& train_cfg, double eps_x,
                            double eps_y, bool diagnostics_on_holdout = false,
                            std::ostream* progress = nullptr);

// Orthogonal complements of everything found so far, plus the accumulated
// bases themselves. Projectors are recomputed as I - UU' after each append,
// on accumulated columns kept orthonormal by modified Gram-Schmidt.
struct DeflationState {
  Matrix proj_x;
  Matrix proj_y;
  Matrix accumulated_u;
  Matrix accumulated_v;
  std::size_t round = 0;
};

DeflationState make_deflation_state(std::size_t n, std::size_t m);

// Orthonormalizes the block against the accumulated basis (and within
// itself) and appends it, updating the matching projector. A first block
// appended to an empty basis is taken verbatim, which keeps a single-round
// deflation bit-identical to the single-network procedure. Columns whose
// residual norm falls below 1e-8 are dropped.
void deflation_append_x(DeflationState& state, const Matrix& block);
void deflation_append_y(DeflationState& state, const Matrix& block);

// Iterative deflation: `rounds` passes, each training a freshly initialized
// network wrapped in the current projectors, then appending the leading
// `keep` eigenvectors of each deflated diagnostic. Round 0 reuses the
// caller's seed so a single-round run reproduces algorithm1's leading block;
// later rounds derive per-round seeds. Throws InvalidConfig (rounds = 0,
// keep = 0, keep > r', or keep > s' when m > 0), RankExhausted when
// rounds * keep exceeds n (or m when m > 0).
struct Algorithm2Result {
  DeflationState state;
  std::vector<Vector> x_spectra;  // per round, spectrum of the deflated CDR
  std::vector<Vector> y_spectra;  // per round, CMI side; absent when m = 0
  std::vector<ScoreRatioNetwork> nets;  // per round, the trained inner net
};

Algorithm2Result algorithm2(const JointSamples& samples, std::size_t rounds,
                            std::size_t keep, const NetworkConfig& net_cfg,
                            const TrainConfig& train_cfg,
                            std::ostream* progress = nullptr);

}  // namespace srdr
