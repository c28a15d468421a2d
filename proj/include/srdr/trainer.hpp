#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "srdr/objective.hpp"
#include "srdr/ratio_net.hpp"
#include "srdr/samples.hpp"

namespace srdr {

// Minibatch Adam on the regularized implicit objective. Negative lambdas
// select the dimension defaults 1/n and 1/m (zero when m = 0). clip_norm
// caps the global gradient norm before each step; non-positive disables
// clipping.
struct TrainConfig {
  double learning_rate = 5e-3;
  std::size_t batch_size = 1000;
  std::size_t epochs = 100;
  double lambda1 = -1.0;
  double lambda2 = -1.0;
  TraceMode trace_mode = exact_trace();
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 100.0;
};

// Throws InvalidConfig unless learning_rate > 0, batch_size >= 1,
// 0 <= validation_fraction < 1, and the decay rates lie in [0, 1).
void validate_train_config(const TrainConfig& cfg);

double resolve_lambda1(const TrainConfig& cfg, std::size_t n);
double resolve_lambda2(const TrainConfig& cfg, std::size_t m);

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::size_t step = 0;
};

AdamState make_adam_state(std::size_t param_count);

// One bias-corrected Adam update in place; increments the step counter.
// Throws DimensionMismatch on length disagreement, NonFiniteGradient when
// the gradient contains a non-finite entry.
void adam_step(AdamState& state, Vector& params, const Vector& grad,
               const TrainConfig& cfg);

// Deterministic holdout split: a seeded permutation of 0..count-1 whose
// first floor(fraction * count) entries become the validation set. The two
// index lists partition the input range.
struct ValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

ValidationSplit make_validation_split(std::size_t count, double fraction,
                                      std::uint64_t seed);

struct TrainReport {
  // Per epoch: training loss averaged over the epoch's minibatch
  // evaluations (weighted by batch size), and the regularized objective on
  // the held-out set after the epoch. val_history is empty when
  // validation_fraction is 0.
  std::vector<double> train_history;
  std::vector<double> val_history;
  double wall_seconds = 0.0;
  // Epoch whose parameter snapshot is returned: the validation minimizer,
  // or the last epoch when no validation set exists.
  std::size_t best_epoch = 0;
};

struct TrainResult {
  ScoreRatioNetwork net;
  TrainReport report;
};

// Runs epochs * ceil(N_train / batch_size) Adam steps on the regularized
// objective of the deflated network proj_x w(x, proj_y y). Deterministic
// per (seed, config, samples): the split, the per-epoch shuffles, and the
// per-step slicing probes all come from named substreams of cfg.seed.
// Returns the best-validation snapshot when a validation set exists, else
// the final parameters. When `progress` is given, one line per epoch is
// written to it. Throws EmptyBatch, DimensionMismatch, InvalidConfig,
// NonFiniteLoss (with step index and term values), NonFiniteGradient.
TrainResult train(const ScoreRatioNetwork& net, const Matrix& proj_x,
                  const Matrix& proj_y, const JointSamples& samples,
                  const TrainConfig& cfg, std::ostream* progress = nullptr);

// Identity-projector convenience overload.
TrainResult train(const ScoreRatioNetwork& net, const JointSamples& samples,
                  const TrainConfig& cfg, std::ostream* progress = nullptr);

}  // namespace srdr
