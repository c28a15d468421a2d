#include "srdr/objective.hpp"

#include <cmath>

#include "srdr/errors.hpp"
#include "srdr/linalg.hpp"
#include "srdr/rng.hpp"

namespace srdr {

Vector reference_score(const ReferenceDensity& rho, const Vector& x) {
  (void)rho;  // standard Gaussian is the only kind
  Vector s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = -x[i];
  return s;
}

namespace {

Vector rademacher_vector(SeededRng& rng, std::size_t n) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.rademacher();
  return v;
}

// Tangent seed in psi-input space for a reduced x-direction: the y block of
// the seed is zero because slicing perturbs x only.
Vector padded_seed(const Vector& reduced, std::size_t s_prime) {
  Vector seed = reduced;
  seed.resize(reduced.size() + s_prime, 0.0);
  return seed;
}

}  // namespace

// The plain path below and the tape path in build_loss_graph perform the
// same operations through the same kernels in the same order, so their
// results are bit-identical. Any change here must be mirrored there.
LossBreakdown implicit_loss(const ScoreRatioNetwork& net, const Matrix& proj_x,
                            const Matrix& proj_y, const JointSamples& batch,
                            const ReferenceDensity& rho, const TraceMode& mode,
                            std::uint64_t slice_seed) {
  const std::size_t count = batch.count();
  if (count == 0) throw EmptyBatch("implicit loss needs at least one sample");
  const std::size_t rp = net.r_prime(), sp = net.s_prime();
  const bool sliced = mode.kind == TraceMode::Kind::sliced;
  if (sliced && mode.slices == 0)
    throw InvalidConfig("sliced trace needs at least one probe");

  double quad_sum = 0.0, trace_sum = 0.0, ref_sum = 0.0;
  Vector seed(rp + sp, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    const Vector x = batch.xs.row(j);
    const Vector y = batch.ys.row(j);
    const Vector py_y = matvec(proj_y, y);
    Vector z = matvec_t(net.w_x, x);
    const Vector zy = matvec_t(net.w_y, py_y);
    z.insert(z.end(), zy.begin(), zy.end());
    const Vector h = mlp_forward(net.psi, z);
    const Vector w = matvec(proj_x, matvec(net.w_x, h));

    quad_sum += 0.5 * dot(w, w);
    ref_sum += dot(reference_score(rho, x), w);

    double tr = 0.0;
    if (!sliced) {
      for (std::size_t i = 0; i < rp; ++i) {
        seed[i] = 1.0;
        const Vector t = mlp_jvp(net.psi, z, seed).tangent;
        seed[i] = 0.0;
        const Vector v =
            matvec_t(net.w_x, matvec(proj_x, matvec(net.w_x, t)));
        tr += v[i];
      }
    } else {
      SeededRng probe_rng(derive_seed(slice_seed, Stream::slice, j));
      double acc = 0.0;
      for (std::size_t i = 0; i < mode.slices; ++i) {
        const Vector probe = rademacher_vector(probe_rng, net.n());
        const Vector reduced = matvec_t(net.w_x, matvec(proj_x, probe));
        const Vector t = mlp_jvp(net.psi, z, padded_seed(reduced, sp)).tangent;
        acc += dot(reduced, t);
      }
      tr = acc * (1.0 / static_cast<double>(mode.slices));
    }
    trace_sum += tr;
  }

  const double inv = 1.0 / static_cast<double>(count);
  LossBreakdown out;
  out.quadratic = quad_sum * inv;
  out.trace = trace_sum * inv;
  out.reference = ref_sum * inv;
  out.total = out.quadratic + out.trace + out.reference;
  return out;
}

LossBreakdown implicit_loss(const ScoreRatioNetwork& net,
                            const JointSamples& batch,
                            const ReferenceDensity& rho, const TraceMode& mode,
                            std::uint64_t slice_seed) {
  return implicit_loss(net, Matrix::identity(net.n()),
                       Matrix::identity(net.m()), batch, rho, mode,
                       slice_seed);
}

double explicit_loss(const ScoreRatioNetwork& net, const JointSamples& batch,
                     const RatioFn& true_ratio) {
  const std::size_t count = batch.count();
  if (count == 0) throw EmptyBatch("explicit loss needs at least one sample");
  double sum = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const Vector x = batch.xs.row(j);
    const Vector y = batch.ys.row(j);
    const Vector diff = sub(ridge_forward(net, x, y), true_ratio(x, y));
    sum += 0.5 * dot(diff, diff);
  }
  return sum * (1.0 / static_cast<double>(count));
}

double nuclear_norm(const Matrix& w) {
  if (w.empty()) throw DimensionMismatch("nuclear norm of an empty matrix");
  double sum = 0.0;
  for (double s : thin_svd(w).singulars) sum += s;
  return sum;
}

Matrix nuclear_subgradient(const Matrix& w) {
  if (w.empty()) throw DimensionMismatch("nuclear norm of an empty matrix");
  const SvdResult svd = thin_svd(w);
  const double cutoff = 1e-12 * (svd.singulars.empty() ? 0.0 : svd.singulars[0]);
  std::size_t keep = 0;
  while (keep < svd.singulars.size() && svd.singulars[keep] > cutoff) ++keep;
  return matmul(svd.left.cols_range(0, keep),
                transpose(svd.right.cols_range(0, keep)));
}

LossBreakdown regularized_objective(const ScoreRatioNetwork& net,
                                    const Matrix& proj_x, const Matrix& proj_y,
                                    const JointSamples& batch,
                                    const ReferenceDensity& rho,
                                    double lambda1, double lambda2,
                                    const TraceMode& mode,
                                    std::uint64_t slice_seed) {
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw InvalidConfig("regularization weights must be nonnegative");
  LossBreakdown out =
      implicit_loss(net, proj_x, proj_y, batch, rho, mode, slice_seed);
  if (lambda1 != 0.0) out.regularizer += lambda1 * nuclear_norm(net.w_x);
  if (lambda2 != 0.0) out.regularizer += lambda2 * nuclear_norm(net.w_y);
  out.total += out.regularizer;
  return out;
}

LossGraph build_loss_graph(Tape& tape, const ScoreRatioNetwork& net,
                           const Matrix& proj_x, const Matrix& proj_y,
                           const JointSamples& batch,
                           const ReferenceDensity& rho, const TraceMode& mode,
                           std::uint64_t slice_seed) {
  const std::size_t count = batch.count();
  if (count == 0) throw EmptyBatch("implicit loss needs at least one sample");
  const std::size_t rp = net.r_prime(), sp = net.s_prime();
  const bool sliced = mode.kind == TraceMode::Kind::sliced;
  if (sliced && mode.slices == 0)
    throw InvalidConfig("sliced trace needs at least one probe");

  tape.clear();
  LossGraph g;
  g.nodes.has_observation_block = sp > 0;
  g.nodes.w_x = tape.param_matrix(net.w_x);
  if (g.nodes.has_observation_block) {
    g.nodes.w_y = tape.param_matrix(net.w_y);
    g.nodes.proj_y = tape.constant_matrix(proj_y);
  }
  g.nodes.proj_x = tape.constant_matrix(proj_x);
  g.nodes.psi = bind_mlp_params(tape, net.psi);

  // Shared constants for the exact trace contraction.
  std::vector<NodeId> seeds, picks;
  if (!sliced) {
    for (std::size_t i = 0; i < rp; ++i) {
      Vector seed(rp + sp, 0.0);
      seed[i] = 1.0;
      seeds.push_back(tape.constant_vector(seed));
      Vector pick(rp, 0.0);
      pick[i] = 1.0;
      picks.push_back(tape.constant_vector(pick));
    }
  }

  std::vector<NodeId> quads, traces, refs;
  quads.reserve(count);
  traces.reserve(count);
  refs.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const Vector x_row = batch.xs.row(j);
    const NodeId x = tape.constant_vector(x_row);
    const NodeId zx = tape.matvec_t(g.nodes.w_x, x);
    NodeId z = zx;
    if (g.nodes.has_observation_block) {
      const NodeId y = tape.constant_vector(batch.ys.row(j));
      const NodeId py_y = tape.matvec(g.nodes.proj_y, y);
      const NodeId zy = tape.matvec_t(g.nodes.w_y, py_y);
      z = tape.concat(zx, zy);
    }
    const NodeId h = mlp_forward_on_tape(tape, g.nodes.psi, z);
    const NodeId w = tape.matvec(g.nodes.proj_x, tape.matvec(g.nodes.w_x, h));

    quads.push_back(tape.scale(tape.dot(w, w), 0.5));
    const NodeId score = tape.constant_vector(reference_score(rho, x_row));
    refs.push_back(tape.dot(score, w));

    if (!sliced) {
      std::vector<NodeId> terms;
      terms.reserve(rp);
      for (std::size_t i = 0; i < rp; ++i) {
        const NodeId t = mlp_tangent_on_tape(tape, g.nodes.psi, seeds[i]);
        const NodeId v = tape.matvec_t(
            g.nodes.w_x,
            tape.matvec(g.nodes.proj_x, tape.matvec(g.nodes.w_x, t)));
        terms.push_back(tape.dot(picks[i], v));
      }
      traces.push_back(tape.add_scalars(terms));
    } else {
      SeededRng probe_rng(derive_seed(slice_seed, Stream::slice, j));
      std::vector<NodeId> terms;
      terms.reserve(mode.slices);
      for (std::size_t i = 0; i < mode.slices; ++i) {
        const NodeId probe =
            tape.constant_vector(rademacher_vector(probe_rng, net.n()));
        const NodeId reduced = tape.matvec_t(
            g.nodes.w_x, tape.matvec(g.nodes.proj_x, probe));
        const NodeId seed =
            sp > 0 ? tape.concat(reduced,
                                 tape.constant_vector(Vector(sp, 0.0)))
                   : reduced;
        const NodeId t = mlp_tangent_on_tape(tape, g.nodes.psi, seed);
        terms.push_back(tape.dot(reduced, t));
      }
      traces.push_back(tape.scale(tape.add_scalars(terms),
                                  1.0 / static_cast<double>(mode.slices)));
    }
  }

  const double inv = 1.0 / static_cast<double>(count);
  g.quadratic = tape.scale(tape.add_scalars(quads), inv);
  g.trace = tape.scale(tape.add_scalars(traces), inv);
  g.reference = tape.scale(tape.add_scalars(refs), inv);
  g.total = tape.add_scalars({g.quadratic, g.trace, g.reference});
  return g;
}

Vector gather_network_gradient(const Tape& tape,
                               const NetworkTapeNodes& nodes) {
  Vector grad = tape.adjoint(nodes.w_x);
  if (nodes.has_observation_block) {
    const Vector gy = tape.adjoint(nodes.w_y);
    grad.insert(grad.end(), gy.begin(), gy.end());
  }
  const Vector gp = gather_mlp_gradient(tape, nodes.psi);
  grad.insert(grad.end(), gp.begin(), gp.end());
  return grad;
}

ObjectiveEval objective_value_and_gradient(
    Tape& tape, const ScoreRatioNetwork& net, const Matrix& proj_x,
    const Matrix& proj_y, const JointSamples& batch,
    const ReferenceDensity& rho, double lambda1, double lambda2,
    const TraceMode& mode, std::uint64_t slice_seed) {
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw InvalidConfig("regularization weights must be nonnegative");
  const LossGraph g = build_loss_graph(tape, net, proj_x, proj_y, batch, rho,
                                       mode, slice_seed);
  tape.backward(g.total);

  ObjectiveEval eval;
  eval.loss.quadratic = tape.scalar(g.quadratic);
  eval.loss.trace = tape.scalar(g.trace);
  eval.loss.reference = tape.scalar(g.reference);
  eval.loss.total = tape.scalar(g.total);
  eval.gradient = gather_network_gradient(tape, g.nodes);

  // Nuclear-norm terms enter through their subgradients, routed to the
  // ridge-matrix slots of the flat gradient.
  if (lambda1 != 0.0) {
    eval.loss.regularizer += lambda1 * nuclear_norm(net.w_x);
    const Matrix sub = nuclear_subgradient(net.w_x);
    const std::size_t base = 0;
    for (std::size_t k = 0; k < sub.entries().size(); ++k)
      eval.gradient[base + k] += lambda1 * sub.entries()[k];
  }
  if (lambda2 != 0.0) {
    eval.loss.regularizer += lambda2 * nuclear_norm(net.w_y);
    const Matrix sub = nuclear_subgradient(net.w_y);
    const std::size_t base = net.w_x.entries().size();
    for (std::size_t k = 0; k < sub.entries().size(); ++k)
      eval.gradient[base + k] += lambda2 * sub.entries()[k];
  }
  eval.loss.total += eval.loss.regularizer;
  return eval;
}

ExplicitEval explicit_value_and_gradient(Tape& tape,
                                         const ScoreRatioNetwork& net,
                                         const JointSamples& batch,
                                         const RatioFn& true_ratio) {
  const std::size_t count = batch.count();
  if (count == 0) throw EmptyBatch("explicit loss needs at least one sample");

  tape.clear();
  NetworkTapeNodes nodes;
  nodes.has_observation_block = net.s_prime() > 0;
  nodes.w_x = tape.param_matrix(net.w_x);
  if (nodes.has_observation_block)
    nodes.w_y = tape.param_matrix(net.w_y);
  nodes.psi = bind_mlp_params(tape, net.psi);

  std::vector<NodeId> terms;
  terms.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const Vector x_row = batch.xs.row(j);
    const Vector y_row = batch.ys.row(j);
    const NodeId x = tape.constant_vector(x_row);
    const NodeId zx = tape.matvec_t(nodes.w_x, x);
    NodeId z = zx;
    if (nodes.has_observation_block) {
      const NodeId y = tape.constant_vector(y_row);
      const NodeId zy = tape.matvec_t(nodes.w_y, y);
      z = tape.concat(zx, zy);
    }
    const NodeId h = mlp_forward_on_tape(tape, nodes.psi, z);
    const NodeId w = tape.matvec(nodes.w_x, h);
    const NodeId diff =
        tape.sub(w, tape.constant_vector(true_ratio(x_row, y_row)));
    terms.push_back(tape.scale(tape.dot(diff, diff), 0.5));
  }
  const NodeId total = tape.scale(tape.add_scalars(terms),
                                  1.0 / static_cast<double>(count));
  tape.backward(total);

  ExplicitEval eval;
  eval.loss = tape.scalar(total);
  eval.gradient = gather_network_gradient(tape, nodes);
  return eval;
}

LinearScoreMap implicit_linear_minimizer(const JointSamples& samples) {
  const std::size_t count = samples.count();
  if (count == 0) throw EmptyBatch("minimizer needs at least one sample");
  const std::size_t n = samples.n(), m = samples.m();
  const std::size_t d = n + m + 1;

  // Empirical second moments of z = (x; y; 1).
  Matrix s(d, d);
  Matrix t(n, d);
  Vector z(d);
  z[d - 1] = 1.0;
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t i = 0; i < n; ++i) z[i] = samples.xs(j, i);
    for (std::size_t i = 0; i < m; ++i) z[n + i] = samples.ys(j, i);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) s(a, b) += z[a] * z[b];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < d; ++b) t(a, b) += z[a] * z[b];
  }
  const double inv = 1.0 / static_cast<double>(count);
  s = inv * s;
  t = inv * t;

  // Stationarity of E[1/2 |Mz|^2 + Tr(B) - x'Mz] in M: M S = T - [I 0 0].
  Matrix rhs = t;
  for (std::size_t i = 0; i < n; ++i) rhs(i, i) -= 1.0;

  const Matrix lower = cholesky(s);
  Matrix full(n, d);
  for (std::size_t i = 0; i < n; ++i)
    full.set_row(i, cholesky_solve(lower, rhs.row(i)));

  LinearScoreMap map;
  map.b = full.cols_range(0, n);
  map.c = full.cols_range(n, m);
  map.bias = full.col(d - 1);
  return map;
}

}  // namespace srdr
