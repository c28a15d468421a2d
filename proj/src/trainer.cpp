#include "srdr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "srdr/errors.hpp"
#include "srdr/format.hpp"
#include "srdr/linalg.hpp"
#include "srdr/rng.hpp"

namespace srdr {

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw InvalidConfig("learning_rate must be positive and finite");
  if (cfg.batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (!(cfg.validation_fraction >= 0.0) || !(cfg.validation_fraction < 1.0))
    throw InvalidConfig("validation_fraction must lie in [0, 1)");
  if (!(cfg.beta1 >= 0.0) || !(cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0) ||
      !(cfg.beta2 < 1.0))
    throw InvalidConfig("Adam decay rates must lie in [0, 1)");
  if (!(cfg.epsilon > 0.0)) throw InvalidConfig("epsilon must be positive");
}

double resolve_lambda1(const TrainConfig& cfg, std::size_t n) {
  return cfg.lambda1 < 0.0 ? 1.0 / static_cast<double>(n) : cfg.lambda1;
}

double resolve_lambda2(const TrainConfig& cfg, std::size_t m) {
  // No observation block to regularize when m = 0.
  if (m == 0) return 0.0;
  return cfg.lambda2 < 0.0 ? 1.0 / static_cast<double>(m) : cfg.lambda2;
}

AdamState make_adam_state(std::size_t param_count) {
  AdamState state;
  state.first_moment = Vector(param_count, 0.0);
  state.second_moment = Vector(param_count, 0.0);
  return state;
}

void adam_step(AdamState& state, Vector& params, const Vector& grad,
               const TrainConfig& cfg) {
  const std::size_t k = params.size();
  if (state.first_moment.size() != k || state.second_moment.size() != k ||
      grad.size() != k)
    throw DimensionMismatch("adam_step: state/params/grad lengths disagree");
  for (std::size_t i = 0; i < k; ++i) {
    // A square that overflows would set the second moment to infinity,
    // permanently zeroing this coordinate's updates.
    if (!std::isfinite(grad[i]) || !std::isfinite(grad[i] * grad[i]))
      throw NonFiniteGradient("adam_step: unusable gradient entry " +
                              std::to_string(i));
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(cfg.beta1, t);
  const double corr2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < k; ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

ValidationSplit make_validation_split(std::size_t count, double fraction,
                                      std::uint64_t seed) {
  if (!(fraction >= 0.0) || !(fraction < 1.0))
    throw InvalidConfig("validation fraction must lie in [0, 1)");
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SeededRng rng(derive_seed(seed, Stream::split));
  fisher_yates(idx, rng);
  const std::size_t n_val =
      static_cast<std::size_t>(fraction * static_cast<double>(count));
  ValidationSplit split;
  split.validation.assign(idx.begin(), idx.begin() + n_val);
  split.train.assign(idx.begin() + n_val, idx.end());
  return split;
}

namespace {

JointSamples gather_rows(const JointSamples& all,
                         const std::vector<std::size_t>& rows,
                         std::size_t begin, std::size_t end) {
  JointSamples out{Matrix(end - begin, all.n()), Matrix(end - begin, all.m())};
  for (std::size_t j = begin; j < end; ++j) {
    out.xs.set_row(j - begin, all.xs.row(rows[j]));
    out.ys.set_row(j - begin, all.ys.row(rows[j]));
  }
  return out;
}

[[noreturn]] void throw_non_finite_loss(std::size_t step,
                                        const LossBreakdown& loss) {
  std::ostringstream msg;
  msg << "train: non-finite loss at step " << step
      << ": quadratic=" << format_g17(loss.quadratic)
      << " trace=" << format_g17(loss.trace)
      << " reference=" << format_g17(loss.reference)
      << " regularizer=" << format_g17(loss.regularizer);
  throw NonFiniteLoss(msg.str());
}

}  // namespace

TrainResult train(const ScoreRatioNetwork& net, const Matrix& proj_x,
                  const Matrix& proj_y, const JointSamples& samples,
                  const TrainConfig& cfg, std::ostream* progress) {
  validate_train_config(cfg);
  validate_network(net);
  validate_samples(samples);
  if (samples.count() == 0) throw EmptyBatch("train: no samples");
  if (samples.n() != net.n() || samples.m() != net.m())
    throw DimensionMismatch("train: sample dimensions do not match network");

  const auto start = std::chrono::steady_clock::now();
  const ReferenceDensity rho{};
  const double lambda1 = resolve_lambda1(cfg, net.n());
  const double lambda2 = resolve_lambda2(cfg, net.m());

  const ValidationSplit split = make_validation_split(
      samples.count(), cfg.validation_fraction, cfg.seed);
  const JointSamples train_set =
      gather_rows(samples, split.train, 0, split.train.size());
  const JointSamples val_set =
      gather_rows(samples, split.validation, 0, split.validation.size());
  const std::size_t n_train = split.train.size();
  const bool has_val = !split.validation.empty();

  TrainResult result{net, TrainReport{}};
  if (cfg.epochs == 0) return result;

  Vector flat = flatten_network(net);
  ScoreRatioNetwork scratch = net;
  AdamState adam = make_adam_state(flat.size());
  Tape tape;

  Vector best_flat = flat;
  double best_val = 0.0;
  bool have_best = false;
  std::size_t global_step = 0;

  std::vector<std::size_t> order(n_train);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng shuffle_rng(derive_seed(cfg.seed, Stream::shuffle, epoch));
    fisher_yates(order, shuffle_rng);

    double epoch_sum = 0.0;
    for (std::size_t begin = 0; begin < n_train; begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, n_train);
      const JointSamples batch = gather_rows(train_set, order, begin, end);
      const std::uint64_t step_seed =
          derive_seed(cfg.seed, Stream::slice, global_step);
      ObjectiveEval eval =
          objective_value_and_gradient(tape, scratch, proj_x, proj_y, batch,
                                       rho, lambda1, lambda2, cfg.trace_mode,
                                       step_seed);
      if (!std::isfinite(eval.loss.total))
        throw_non_finite_loss(global_step, eval.loss);

      if (cfg.clip_norm > 0.0) {
        const double g_norm = norm(eval.gradient);
        // An overflowed norm would clip the step to zero and freeze
        // training permanently; abort instead.
        if (!std::isfinite(g_norm))
          throw NonFiniteGradient("train: gradient norm overflowed at step " +
                                  std::to_string(global_step));
        if (g_norm > cfg.clip_norm)
          eval.gradient = scale(cfg.clip_norm / g_norm, eval.gradient);
      }
      adam_step(adam, flat, eval.gradient, cfg);
      unflatten_network(flat, &scratch);

      epoch_sum += eval.loss.total * static_cast<double>(end - begin);
      ++global_step;
    }
    const double train_loss = epoch_sum / static_cast<double>(n_train);
    result.report.train_history.push_back(train_loss);

    if (has_val) {
      const LossBreakdown val_loss = regularized_objective(
          scratch, proj_x, proj_y, val_set, rho, lambda1, lambda2,
          cfg.trace_mode, derive_seed(cfg.seed, Stream::val_slice, epoch));
      if (!std::isfinite(val_loss.total))
        throw_non_finite_loss(global_step, val_loss);
      result.report.val_history.push_back(val_loss.total);
      if (!have_best || val_loss.total < best_val) {
        best_val = val_loss.total;
        best_flat = flat;
        result.report.best_epoch = epoch;
        have_best = true;
      }
      if (progress)
        *progress << "epoch " << epoch << " train " << format_g17(train_loss)
                  << " val " << format_g17(val_loss.total) << "\n";
    } else if (progress) {
      *progress << "epoch " << epoch << " train " << format_g17(train_loss)
                << "\n";
    }
  }

  if (has_val) {
    unflatten_network(best_flat, &result.net);
  } else {
    result.net = scratch;
    result.report.best_epoch = cfg.epochs - 1;
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

TrainResult train(const ScoreRatioNetwork& net, const JointSamples& samples,
                  const TrainConfig& cfg, std::ostream* progress) {
  return train(net, Matrix::identity(net.n()), Matrix::identity(net.m()),
               samples, cfg, progress);
}

}  // namespace srdr
