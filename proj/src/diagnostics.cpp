#include "srdr/diagnostics.hpp"

#include <string>

#include "srdr/errors.hpp"
#include "srdr/linalg.hpp"
#include "srdr/rng.hpp"

namespace srdr {

DiagnosticMatrix estimate_hx(const RatioFn& ratio,
                             const JointSamples& samples) {
  const std::size_t count = samples.count(), n = samples.n();
  if (count == 0) throw EmptyBatch("diagnostic needs at least one sample");
  Matrix acc(n, n);
  for (std::size_t j = 0; j < count; ++j) {
    const Vector w = ratio(samples.xs.row(j), samples.ys.row(j));
    if (w.size() != n)
      throw DimensionMismatch("ratio output length " +
                              std::to_string(w.size()) + ", expected " +
                              std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) acc(i, k) += w[i] * w[k];
  }
  const double inv = 1.0 / static_cast<double>(count);
  return DiagnosticMatrix{DiagnosticKind::cdr_parameter, inv * acc, count};
}

DiagnosticMatrix estimate_hx(const ScoreRatioNetwork& net,
                             const JointSamples& samples) {
  if (net.n() != samples.n() || net.m() != samples.m())
    throw DimensionMismatch("network and samples disagree on dimensions");
  return estimate_hx(
      [&net](const Vector& x, const Vector& y) {
        return ridge_forward(net, x, y);
      },
      samples);
}

DiagnosticMatrix estimate_hy(const ObsGradFn& obs_grad,
                             const JointSamples& samples) {
  const std::size_t count = samples.count(), n = samples.n(),
                    m = samples.m();
  if (count == 0) throw EmptyBatch("diagnostic needs at least one sample");
  Matrix acc(m, m);
  for (std::size_t j = 0; j < count; ++j) {
    const Matrix g = obs_grad(samples.xs.row(j), samples.ys.row(j));
    if (g.rows() != n || g.cols() != m)
      throw DimensionMismatch("observation gradient must be n x m");
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += g(i, a) * g(i, b);
        acc(a, b) += s;
      }
  }
  const double inv = 1.0 / static_cast<double>(count);
  return DiagnosticMatrix{DiagnosticKind::cmi_observation, inv * acc, count};
}

DiagnosticMatrix estimate_hy(const ScoreRatioNetwork& net,
                             const JointSamples& samples) {
  if (net.n() != samples.n() || net.m() != samples.m())
    throw DimensionMismatch("network and samples disagree on dimensions");
  return estimate_hy(
      [&net](const Vector& x, const Vector& y) {
        return observation_gradient(net, x, y);
      },
      samples);
}

void validate_diagnostic(const DiagnosticMatrix& diag) {
  const Matrix& h = diag.matrix;
  if (h.rows() != h.cols())
    throw DimensionMismatch("diagnostic matrix must be square");
  if (h.rows() == 0) return;
  const EigenPairs e = sym_eigendecompose(h);  // enforces symmetry
  const double top = e.values.front();
  const double floor = -1e-10 * (top > 1.0 ? top : 1.0);
  if (e.values.back() < floor)
    throw NotPositiveDefinite("diagnostic eigenvalue " +
                              std::to_string(e.values.back()) +
                              " below the PSD tolerance");
}

RankSelection select_rank(const Vector& spectrum, double eps,
                          DiagnosticKind kind) {
  const std::size_t d = spectrum.size();
  const double factor = kind == DiagnosticKind::cdr_parameter ? 0.5 : 1.0;
  // tail(r) = sum of eigenvalues past the first r, accumulated back to front
  // so each tail is a plain left-to-right float sum.
  Vector tail(d + 1, 0.0);
  for (std::size_t k = d; k-- > 0;) tail[k] = tail[k + 1] + spectrum[k];
  for (std::size_t r = 0; r <= d; ++r)
    if (factor * tail[r] < eps) return RankSelection{r, r == d && d > 0};
  return RankSelection{d, true};
}

namespace {

double projected_residual(const Matrix& basis, const Matrix& h,
                          const char* what) {
  if (h.rows() != h.cols())
    throw DimensionMismatch(std::string(what) + ": matrix must be square");
  if (basis.rows() != h.rows())
    throw DimensionMismatch(std::string(what) +
                            ": basis rows must match the matrix dimension");
  if (!has_orthonormal_columns(basis))
    throw NotOrthonormal(std::string(what) +
                         ": basis columns must be orthonormal");
  double res = trace(h);
  for (std::size_t k = 0; k < basis.cols(); ++k) {
    const Vector u = basis.col(k);
    res -= dot(u, matvec(h, u));
  }
  return res > 0.0 ? res : 0.0;  // rounding residue below exact zero
}

}  // namespace

double error_bound_cdr(const Matrix& u, const Matrix& h_true) {
  return 0.5 * projected_residual(u, h_true, "error_bound_cdr");
}

double error_bound_cmi(const Matrix& v, const Matrix& h_true) {
  return projected_residual(v, h_true, "error_bound_cmi");
}

ReductionBasis reduce_from_diagnostic(const DiagnosticMatrix& diag,
                                      double eps) {
  ReductionBasis out;
  if (diag.matrix.rows() == 0) return out;
  const EigenPairs e = sym_eigendecompose(diag.matrix);
  out.spectrum = e.values;
  const RankSelection sel = select_rank(out.spectrum, eps, diag.kind);
  out.rank = sel.rank;
  out.rank_warning = sel.warning;
  out.basis = e.vectors.cols_range(0, sel.rank);
  const double factor =
      diag.kind == DiagnosticKind::cdr_parameter ? 0.5 : 1.0;
  double tail = 0.0;
  for (std::size_t k = out.spectrum.size(); k-- > sel.rank;)
    tail += out.spectrum[k];
  out.residual_bound = factor * tail;
  return out;
}

Algorithm1Result algorithm1(const JointSamples& samples,
                            const NetworkConfig& net_cfg,
                            const TrainConfig& train_cfg, double eps_x,
                            double eps_y, bool diagnostics_on_holdout,
                            std::ostream* progress) {
  validate_samples(samples);
  if (samples.count() == 0) throw EmptyBatch("algorithm1: no samples");

  SeededRng init_rng(derive_seed(train_cfg.seed, Stream::net_init));
  const ScoreRatioNetwork fresh =
      init_network(samples.n(), samples.m(), net_cfg, init_rng);
  TrainResult trained = train(fresh, samples, train_cfg, progress);

  JointSamples holdout;
  const JointSamples* diag_samples = &samples;
  if (diagnostics_on_holdout) {
    if (train_cfg.validation_fraction == 0.0)
      throw InvalidConfig(
          "holdout diagnostics need a nonzero validation fraction");
    const ValidationSplit split = make_validation_split(
        samples.count(), train_cfg.validation_fraction, train_cfg.seed);
    holdout = select_rows(samples, split.validation);
    diag_samples = &holdout;
  }

  Algorithm1Result out;
  out.hx = estimate_hx(trained.net, *diag_samples);
  out.hy = estimate_hy(trained.net, *diag_samples);
  out.x_basis = reduce_from_diagnostic(out.hx, eps_x);
  out.y_basis = reduce_from_diagnostic(out.hy, eps_y);
  out.net = std::move(trained.net);
  out.report = std::move(trained.report);
  return out;
}

DeflationState make_deflation_state(std::size_t n, std::size_t m) {
  DeflationState state;
  state.proj_x = Matrix::identity(n);
  state.proj_y = Matrix::identity(m);
  state.accumulated_u = Matrix(n, 0);
  state.accumulated_v = Matrix(m, 0);
  return state;
}

namespace {

void append_block(Matrix* accumulated, Matrix* proj, const Matrix& block) {
  const std::size_t n = accumulated->rows();
  if (block.rows() != n)
    throw DimensionMismatch("deflation block has the wrong row count");

  if (accumulated->cols() == 0) {
    // Verbatim first block: bit-identical to the undeflated procedure.
    *accumulated = block;
  } else {
    for (std::size_t c = 0; c < block.cols(); ++c) {
      Vector v = block.col(c);
      // Two passes of modified Gram-Schmidt control drift against columns
      // that are themselves only orthonormal to rounding.
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t q = 0; q < accumulated->cols(); ++q) {
          const Vector qc = accumulated->col(q);
          v = sub(v, scale(dot(qc, v), qc));
        }
      const double len = norm(v);
      if (len < 1e-8) continue;  // direction already spanned: drop it
      v = scale(1.0 / len, v);
      Matrix wider(n, accumulated->cols() + 1);
      for (std::size_t j = 0; j < accumulated->cols(); ++j)
        wider.set_col(j, accumulated->col(j));
      wider.set_col(accumulated->cols(), v);
      *accumulated = std::move(wider);
    }
  }
  if (!has_orthonormal_columns(*accumulated))
    throw NotOrthonormal("accumulated deflation basis lost orthonormality");
  *proj = Matrix::identity(n) -
          matmul(*accumulated, transpose(*accumulated));
}

}  // namespace

void deflation_append_x(DeflationState& state, const Matrix& block) {
  append_block(&state.accumulated_u, &state.proj_x, block);
}

void deflation_append_y(DeflationState& state, const Matrix& block) {
  append_block(&state.accumulated_v, &state.proj_y, block);
}

Algorithm2Result algorithm2(const JointSamples& samples, std::size_t rounds,
                            std::size_t keep, const NetworkConfig& net_cfg,
                            const TrainConfig& train_cfg,
                            std::ostream* progress) {
  validate_samples(samples);
  if (samples.count() == 0) throw EmptyBatch("algorithm2: no samples");
  const std::size_t n = samples.n(), m = samples.m();
  if (rounds < 1) throw InvalidConfig("deflation needs at least one round");
  if (keep < 1) throw InvalidConfig("deflation keeps at least one vector");
  if (keep > net_cfg.r_prime)
    throw InvalidConfig("per-round count exceeds the network rank r'");
  if (m > 0 && keep > net_cfg.s_prime)
    throw InvalidConfig("per-round count exceeds the network rank s'");
  if (rounds * keep > n)
    throw RankExhausted("rounds * keep exceeds the parameter dimension");
  if (m > 0 && rounds * keep > m)
    throw RankExhausted("rounds * keep exceeds the observation dimension");

  Algorithm2Result out;
  out.state = make_deflation_state(n, m);

  for (std::size_t t = 0; t < rounds; ++t) {
    // Round 0 reuses the caller's seed: one round reproduces the
    // single-network procedure exactly.
    TrainConfig round_cfg = train_cfg;
    if (t > 0) round_cfg.seed = derive_seed(train_cfg.seed, Stream::round, t);

    SeededRng init_rng(derive_seed(round_cfg.seed, Stream::net_init));
    const ScoreRatioNetwork fresh = init_network(n, m, net_cfg, init_rng);
    const TrainResult trained = train(fresh, out.state.proj_x,
                                      out.state.proj_y, samples, round_cfg,
                                      progress);
    const DeflatedNetwork deflated =
        deflate_network(trained.net, out.state.proj_x, out.state.proj_y);

    const DiagnosticMatrix hx = estimate_hx(
        [&deflated](const Vector& x, const Vector& y) {
          return deflated_forward(deflated, x, y);
        },
        samples);
    const EigenPairs ex = sym_eigendecompose(hx.matrix);
    out.x_spectra.push_back(ex.values);
    deflation_append_x(out.state, ex.vectors.cols_range(0, keep));

    if (m > 0) {
      const DiagnosticMatrix hy = estimate_hy(
          [&deflated](const Vector& x, const Vector& y) {
            return deflated_observation_gradient(deflated, x, y);
          },
          samples);
      const EigenPairs ey = sym_eigendecompose(hy.matrix);
      out.y_spectra.push_back(ey.values);
      deflation_append_y(out.state, ey.vectors.cols_range(0, keep));
    }
    out.nets.push_back(trained.net);
    out.state.round += 1;
  }
  return out;
}

}  // namespace srdr
