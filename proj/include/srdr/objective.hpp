#pragma once

#include <cstdint>
#include <functional>

#include "srdr/matrix.hpp"
#include "srdr/ratio_net.hpp"
#include "srdr/samples.hpp"
#include "srdr/tape.hpp"

namespace srdr {

// Reference density rho whose score enters the implicit loss. The standard
// Gaussian (score -x) is the required kind; the tag keeps the signature open
// for other references without committing to any.
struct ReferenceDensity {
  enum class Kind { standard_gaussian };
  Kind kind = Kind::standard_gaussian;
};

Vector reference_score(const ReferenceDensity& rho, const Vector& x);

// Exact mode contracts the structured Jacobian with r' tangent sweeps per
// sample; sliced mode is the Hutchinson estimator with `slices` fresh
// Rademacher probes per sample.
struct TraceMode {
  enum class Kind { exact, sliced };
  Kind kind = Kind::exact;
  std::size_t slices = 100;
};

inline TraceMode exact_trace() { return TraceMode{TraceMode::Kind::exact, 0}; }
inline TraceMode sliced_trace(std::size_t slices) {
  return TraceMode{TraceMode::Kind::sliced, slices};
}

// Batch means of the three implicit-loss summands
//   1/2 |w|^2  +  Tr(grad_x w)  +  score_rho(x)' w
// plus the nuclear-norm regularizer. total is always their sum.
struct LossBreakdown {
  double quadratic = 0.0;
  double trace = 0.0;
  double reference = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
};

// Implicit score-ratio-matching loss of the deflated network
// proj_x w(x, proj_y y). Identity projectors give the plain network; both
// cases run the same code path so single-network and deflated training are
// structurally identical. Sample j of a sliced evaluation draws its probes
// from the substream (slice_seed, slice, j), so the loss is deterministic
// given the seed and independent of batch splitting.
// Throws EmptyBatch, DimensionMismatch.
LossBreakdown implicit_loss(const ScoreRatioNetwork& net, const Matrix& proj_x,
                            const Matrix& proj_y, const JointSamples& batch,
                            const ReferenceDensity& rho, const TraceMode& mode,
                            std::uint64_t slice_seed = 0);

// Convenience overload with identity projectors.
LossBreakdown implicit_loss(const ScoreRatioNetwork& net,
                            const JointSamples& batch,
                            const ReferenceDensity& rho, const TraceMode& mode,
                            std::uint64_t slice_seed = 0);

using RatioFn = std::function<Vector(const Vector& x, const Vector& y)>;

// 1/(2N) sum |w_net - w_true|^2: the explicit L2 matching loss, computable
// only when an analytic ratio is available. Equals the implicit loss up to a
// parameter-free constant in expectation.
double explicit_loss(const ScoreRatioNetwork& net, const JointSamples& batch,
                     const RatioFn& true_ratio);

// Sum of singular values, and the subgradient U V' restricted to singular
// values above 1e-12 * sigma_max. Throws DimensionMismatch on an empty
// matrix.
double nuclear_norm(const Matrix& w);
Matrix nuclear_subgradient(const Matrix& w);

// implicit_loss plus lambda1 |W_x|_* + lambda2 |W_y|_*.
LossBreakdown regularized_objective(const ScoreRatioNetwork& net,
                                    const Matrix& proj_x, const Matrix& proj_y,
                                    const JointSamples& batch,
                                    const ReferenceDensity& rho,
                                    double lambda1, double lambda2,
                                    const TraceMode& mode,
                                    std::uint64_t slice_seed = 0);

// Tape leaves of one network binding: parameters (adjoints read back after
// backward) plus the constant projectors. The observation block (w_y,
// proj_y) is bound only when s' > 0; the tape has no empty nodes, and an
// empty w_y contributes no gradient entries anyway.
struct NetworkTapeNodes {
  NodeId w_x = 0;
  NodeId w_y = 0;
  NodeId proj_x = 0;
  NodeId proj_y = 0;
  bool has_observation_block = false;
  MlpTapeNodes psi;
};

// Scalar roots of the recorded batch loss. total excludes the regularizer,
// whose subgradient is added analytically to the W_x / W_y slots.
struct LossGraph {
  NetworkTapeNodes nodes;
  NodeId quadratic = 0;
  NodeId trace = 0;
  NodeId reference = 0;
  NodeId total = 0;
};

// Clears the tape and records the full batch loss. The recorded values are
// bit-identical to the plain implicit_loss evaluation: both route through
// the same kernels in the same order.
LossGraph build_loss_graph(Tape& tape, const ScoreRatioNetwork& net,
                           const Matrix& proj_x, const Matrix& proj_y,
                           const JointSamples& batch,
                           const ReferenceDensity& rho, const TraceMode& mode,
                           std::uint64_t slice_seed = 0);

// Parameter adjoints in flatten_network order; call after tape.backward().
Vector gather_network_gradient(const Tape& tape, const NetworkTapeNodes& nodes);

// Loss and gradient of the regularized objective in one pass: records the
// graph, runs backward, gathers adjoints, and adds the nuclear-norm
// subgradients to the ridge-matrix slots.
struct ObjectiveEval {
  LossBreakdown loss;
  Vector gradient;
};

ObjectiveEval objective_value_and_gradient(
    Tape& tape, const ScoreRatioNetwork& net, const Matrix& proj_x,
    const Matrix& proj_y, const JointSamples& batch,
    const ReferenceDensity& rho, double lambda1, double lambda2,
    const TraceMode& mode, std::uint64_t slice_seed = 0);

// Gradient of the explicit L2 loss, for oracle-based consistency checks.
struct ExplicitEval {
  double loss = 0.0;
  Vector gradient;
};

ExplicitEval explicit_value_and_gradient(Tape& tape,
                                         const ScoreRatioNetwork& net,
                                         const JointSamples& batch,
                                         const RatioFn& true_ratio);

// Closed-form minimizer of the implicit loss over exact linear maps
// w(x,y) = Bx + Cy + b, from the empirical normal equations: with
// z = (x; y; 1), S = mean zz', T = mean xz', the stationarity condition is
// M S = T - [I 0 0] for M = [B C b]. On the linear-Gaussian problem the
// population solution is B = -A'Gamma^-1 A, C = A'Gamma^-1, b = 0, which
// identifies the implicit loss's minimizer with the true score ratio.
struct LinearScoreMap {
  Matrix b;     // n x n
  Matrix c;     // n x m
  Vector bias;  // n
};

LinearScoreMap implicit_linear_minimizer(const JointSamples& samples);

}  // namespace srdr
