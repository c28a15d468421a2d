#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "srdr/linalg.hpp"
#include "srdr/objective.hpp"
#include "srdr/problems/lingauss.hpp"

using namespace srdr;
using srdr::testing::check_grad_against_fd;
using srdr::testing::cosine_similarity;
using srdr::testing::random_network;
using srdr::testing::rel_frobenius_error;

namespace {

const ReferenceDensity kGaussian{};

// w(x) = -x in one dimension: W_x = (1), psi affine with weight -1.
ScoreRatioNetwork negative_identity_net() {
  ScoreRatioNetwork net;
  net.w_x = Matrix(1, 1, {1.0});
  net.w_y = Matrix(0, 0);
  net.psi.weights.push_back(Matrix(1, 1, {-1.0}));
  net.psi.biases.push_back(Vector{0.0});
  validate_network(net);
  return net;
}

JointSamples x_only_batch(const std::vector<double>& xs) {
  JointSamples batch{Matrix(xs.size(), 1), Matrix(xs.size(), 0)};
  for (std::size_t j = 0; j < xs.size(); ++j) batch.xs(j, 0) = xs[j];
  return batch;
}

LinGaussProblem test_problem(std::size_t n, std::size_t m, SeededRng& rng) {
  const Matrix a = rng.gaussian_matrix(m, n);
  Matrix gamma = srdr::testing::random_psd(m, rng);
  for (std::size_t i = 0; i < m; ++i) gamma(i, i) += 0.5;
  return make_lingauss(a, gamma);
}

}  // namespace

TEST_CASE("reference score of the standard Gaussian is -x") {
  CHECK(reference_score(kGaussian, Vector{1.0, -2.5, 0.0}) ==
        Vector{-1.0, 2.5, 0.0});
}

TEST_CASE("loss of w(x) = -x matches the hand evaluation") {
  const ScoreRatioNetwork net = negative_identity_net();
  // Per sample: 1/2 x^2 (quadratic) - 1 (trace) + x^2 (reference).
  const LossBreakdown at_zero =
      implicit_loss(net, x_only_batch({0.0}), kGaussian, exact_trace());
  CHECK(at_zero.quadratic == 0.0);
  CHECK(at_zero.trace == -1.0);
  CHECK(at_zero.reference == 0.0);
  CHECK(at_zero.total == -1.0);

  const LossBreakdown at_two =
      implicit_loss(net, x_only_batch({2.0}), kGaussian, exact_trace());
  CHECK(at_two.quadratic == 2.0);
  CHECK(at_two.trace == -1.0);
  CHECK(at_two.reference == 4.0);
  CHECK(at_two.total == 5.0);

  const LossBreakdown mixed =
      implicit_loss(net, x_only_batch({0.0, 2.0}), kGaussian, exact_trace());
  CHECK(mixed.total == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("zero network has exactly zero loss") {
  SeededRng rng(301);
  const ScoreRatioNetwork net =
      init_network(4, 3, NetworkConfig{2, 2, 2, 8}, rng);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const JointSamples batch = sample_lingauss(p, 10, 302);
  const LossBreakdown loss =
      implicit_loss(net, batch, kGaussian, exact_trace());
  CHECK(loss.quadratic == 0.0);
  CHECK(loss.trace == 0.0);
  CHECK(loss.reference == 0.0);
  CHECK(loss.total == 0.0);
}

TEST_CASE("loss rejects empty batches and zero-probe slicing") {
  SeededRng rng(303);
  const ScoreRatioNetwork net =
      init_network(2, 0, NetworkConfig{1, 0, 1, 4}, rng);
  const JointSamples empty{Matrix(0, 2), Matrix(0, 0)};
  CHECK_THROWS_AS(implicit_loss(net, empty, kGaussian, exact_trace()),
                  EmptyBatch);
  const JointSamples one{Matrix(1, 2), Matrix(1, 0)};
  CHECK_THROWS_AS(implicit_loss(net, one, kGaussian, sliced_trace(0)),
                  InvalidConfig);
  CHECK_THROWS_AS(explicit_loss(net, empty,
                                [](const Vector& x, const Vector&) {
                                  return x;
                                }),
                  EmptyBatch);
}

TEST_CASE("plain and tape evaluations are bit-identical") {
  SeededRng rng(304);
  const ScoreRatioNetwork net =
      random_network(4, 3, NetworkConfig{2, 2, 2, 8}, rng);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const JointSamples batch = sample_lingauss(p, 16, 305);
  const Matrix ix = Matrix::identity(4), iy = Matrix::identity(3);

  Tape tape;
  for (const TraceMode& mode : {exact_trace(), sliced_trace(8)}) {
    const LossBreakdown plain =
        implicit_loss(net, ix, iy, batch, kGaussian, mode, 99);
    const LossGraph g =
        build_loss_graph(tape, net, ix, iy, batch, kGaussian, mode, 99);
    CHECK(tape.scalar(g.quadratic) == plain.quadratic);
    CHECK(tape.scalar(g.trace) == plain.trace);
    CHECK(tape.scalar(g.reference) == plain.reference);
    CHECK(tape.scalar(g.total) == plain.total);
  }
}

TEST_CASE("deflated loss with rank-deficient projectors stays consistent") {
  SeededRng rng(306);
  const ScoreRatioNetwork net =
      random_network(4, 3, NetworkConfig{2, 1, 1, 6}, rng);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const JointSamples batch = sample_lingauss(p, 12, 307);
  Matrix px = Matrix::identity(4);
  px(0, 0) = 0.0;
  Matrix py = Matrix::identity(3);
  py(2, 2) = 0.0;

  Tape tape;
  const LossBreakdown plain =
      implicit_loss(net, px, py, batch, kGaussian, exact_trace());
  const LossGraph g =
      build_loss_graph(tape, net, px, py, batch, kGaussian, exact_trace());
  CHECK(tape.scalar(g.total) == plain.total);

  // The quadratic term only sees the projected output.
  const DeflatedNetwork defl = deflate_network(net, px, py);
  double quad = 0.0;
  for (std::size_t j = 0; j < batch.count(); ++j) {
    const Vector w = deflated_forward(defl, batch.xs.row(j), batch.ys.row(j));
    quad += 0.5 * dot(w, w);
  }
  quad *= 1.0 / static_cast<double>(batch.count());
  CHECK(plain.quadratic == doctest::Approx(quad).epsilon(1e-14));
}

TEST_CASE("sliced trace agrees with the exact trace within Monte Carlo error") {
  SeededRng rng(308);
  const ScoreRatioNetwork net =
      random_network(3, 2, NetworkConfig{2, 1, 2, 8}, rng);
  const LinGaussProblem p = test_problem(3, 2, rng);
  const std::size_t count = 256, slices = 4096;
  const JointSamples batch = sample_lingauss(p, count, 309);
  const std::uint64_t slice_seed = 310;

  const double exact =
      implicit_loss(net, batch, kGaussian, exact_trace()).trace;
  const double sliced =
      implicit_loss(net, batch, kGaussian, sliced_trace(slices), slice_seed)
          .trace;

  // Hand-rolled probe statistics with the same substreams, giving the
  // estimator's standard error (probes are independent within a sample).
  const Matrix ident = Matrix::identity(3);
  double var_of_mean = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const Vector z =
        reduced_coordinates(net, batch.xs.row(j), batch.ys.row(j));
    SeededRng probe_rng(derive_seed(slice_seed, Stream::slice, j));
    double mean = 0.0, mean_sq = 0.0;
    for (std::size_t i = 0; i < slices; ++i) {
      Vector probe(3);
      for (double& e : probe) e = probe_rng.rademacher();
      const Vector reduced = matvec_t(net.w_x, matvec(ident, probe));
      Vector seed = reduced;
      seed.resize(reduced.size() + net.s_prime(), 0.0);
      const double est = dot(reduced, mlp_jvp(net.psi, z, seed).tangent);
      mean += est;
      mean_sq += est * est;
    }
    mean /= static_cast<double>(slices);
    mean_sq /= static_cast<double>(slices);
    var_of_mean += (mean_sq - mean * mean) / static_cast<double>(slices);
  }
  const double se = std::sqrt(var_of_mean) / static_cast<double>(count);
  CHECK(std::fabs(sliced - exact) <= 3.0 * se);
}

TEST_CASE("independent sliced evaluations center on the exact trace") {
  SeededRng rng(311);
  const ScoreRatioNetwork net =
      random_network(3, 2, NetworkConfig{2, 1, 2, 8}, rng);
  const LinGaussProblem p = test_problem(3, 2, rng);
  const JointSamples batch = sample_lingauss(p, 64, 312);
  const double exact =
      implicit_loss(net, batch, kGaussian, exact_trace()).trace;

  const int evals = 50;
  double mean = 0.0, mean_sq = 0.0;
  for (int e = 0; e < evals; ++e) {
    const double t =
        implicit_loss(net, batch, kGaussian, sliced_trace(100), 1000 + e)
            .trace;
    mean += t;
    mean_sq += t * t;
  }
  mean /= evals;
  mean_sq /= evals;
  const double se = std::sqrt((mean_sq - mean * mean) / evals);
  CHECK(std::fabs(mean - exact) <= 4.0 * se);
}

TEST_CASE("objective gradient matches finite differences") {
  SeededRng rng(313);
  ScoreRatioNetwork net = random_network(4, 3, NetworkConfig{2, 2, 2, 6}, rng);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const JointSamples batch = sample_lingauss(p, 8, 314);
  const Matrix ix = Matrix::identity(4), iy = Matrix::identity(3);

  Tape tape;
  const ObjectiveEval eval = objective_value_and_gradient(
      tape, net, ix, iy, batch, kGaussian, 0.0, 0.0, exact_trace());
  CHECK(eval.loss.total == eval.loss.quadratic + eval.loss.trace +
                               eval.loss.reference + eval.loss.regularizer);

  ScoreRatioNetwork scratch = net;
  auto f = [&](const Vector& flat) {
    unflatten_network(flat, &scratch);
    return implicit_loss(scratch, batch, kGaussian, exact_trace()).total;
  };
  check_grad_against_fd(eval.gradient, f, flatten_network(net), 1e-4);
}

TEST_CASE("sliced-mode gradient differentiates the sliced estimator") {
  SeededRng rng(315);
  ScoreRatioNetwork net = random_network(3, 2, NetworkConfig{2, 1, 1, 5}, rng);
  const LinGaussProblem p = test_problem(3, 2, rng);
  const JointSamples batch = sample_lingauss(p, 6, 316);
  const Matrix ix = Matrix::identity(3), iy = Matrix::identity(2);

  Tape tape;
  const ObjectiveEval eval = objective_value_and_gradient(
      tape, net, ix, iy, batch, kGaussian, 0.0, 0.0, sliced_trace(16), 42);
  ScoreRatioNetwork scratch = net;
  auto f = [&](const Vector& flat) {
    unflatten_network(flat, &scratch);
    return implicit_loss(scratch, ix, iy, batch, kGaussian, sliced_trace(16),
                         42)
        .total;
  };
  check_grad_against_fd(eval.gradient, f, flatten_network(net), 1e-4);
}

TEST_CASE("nuclear norm and subgradient on canonical examples") {
  CHECK(nuclear_norm(Matrix(2, 2, {3.0, 0.0, 0.0, 4.0})) ==
        doctest::Approx(7.0).epsilon(1e-12));
  const Matrix sub = nuclear_subgradient(Matrix(2, 2, {3.0, 0.0, 0.0, 4.0}));
  CHECK(max_abs_diff(sub, Matrix::identity(2)) < 1e-12);

  CHECK(nuclear_norm(Matrix(3, 2)) == 0.0);
  CHECK(max_abs(nuclear_subgradient(Matrix(3, 2))) == 0.0);
  CHECK_THROWS_AS(nuclear_norm(Matrix(0, 2)), DimensionMismatch);

  // Rank one: 5 a b' for unit vectors a, b.
  SeededRng rng(317);
  Vector a = rng.gaussian_vector(4), b = rng.gaussian_vector(3);
  a = scale(1.0 / norm(a), a);
  b = scale(1.0 / norm(b), b);
  const Matrix w = 5.0 * outer(a, b);
  CHECK(nuclear_norm(w) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(max_abs_diff(nuclear_subgradient(w), outer(a, b)) < 1e-9);
}

TEST_CASE("nuclear subgradient matches finite differences away from kinks") {
  SeededRng rng(318);
  const Matrix w = rng.gaussian_matrix(4, 3);
  const Matrix sub = nuclear_subgradient(w);
  Matrix scratch = w;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double h = 1e-6;
      scratch(i, j) = w(i, j) + h;
      const double up = nuclear_norm(scratch);
      scratch(i, j) = w(i, j) - h;
      const double down = nuclear_norm(scratch);
      scratch(i, j) = w(i, j);
      CHECK(std::fabs(sub(i, j) - (up - down) / (2 * h)) < 1e-6);
    }
}

TEST_CASE("regularizer scales linearly and vanishes at zero weights") {
  SeededRng rng(319);
  const ScoreRatioNetwork net =
      random_network(4, 3, NetworkConfig{2, 2, 1, 6}, rng);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const JointSamples batch = sample_lingauss(p, 8, 320);
  const Matrix ix = Matrix::identity(4), iy = Matrix::identity(3);

  const LossBreakdown bare =
      implicit_loss(net, ix, iy, batch, kGaussian, exact_trace());
  const LossBreakdown zero = regularized_objective(net, ix, iy, batch,
                                                   kGaussian, 0.0, 0.0,
                                                   exact_trace());
  CHECK(zero.total == bare.total);
  CHECK(zero.regularizer == 0.0);

  const LossBreakdown single = regularized_objective(
      net, ix, iy, batch, kGaussian, 0.25, 1.0 / 3.0, exact_trace());
  const LossBreakdown doubled = regularized_objective(
      net, ix, iy, batch, kGaussian, 0.5, 2.0 / 3.0, exact_trace());
  CHECK(doubled.regularizer == doctest::Approx(2.0 * single.regularizer)
                                   .epsilon(1e-15));
  CHECK(single.total ==
        doctest::Approx(bare.total + single.regularizer).epsilon(1e-15));
  CHECK_THROWS_AS(regularized_objective(net, ix, iy, batch, kGaussian, -0.1,
                                        0.0, exact_trace()),
                  InvalidConfig);
}

TEST_CASE("regularized gradient routes subgradients to the ridge slots") {
  SeededRng rng(321);
  const ScoreRatioNetwork net =
      random_network(4, 3, NetworkConfig{2, 2, 1, 6}, rng);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const JointSamples batch = sample_lingauss(p, 8, 322);
  const Matrix ix = Matrix::identity(4), iy = Matrix::identity(3);

  Tape tape;
  const Vector bare = objective_value_and_gradient(tape, net, ix, iy, batch,
                                                   kGaussian, 0.0, 0.0,
                                                   exact_trace())
                          .gradient;
  const double l1 = 0.1, l2 = 0.2;
  const Vector reg = objective_value_and_gradient(tape, net, ix, iy, batch,
                                                  kGaussian, l1, l2,
                                                  exact_trace())
                         .gradient;
  const Matrix sx = nuclear_subgradient(net.w_x);
  const Matrix sy = nuclear_subgradient(net.w_y);
  const std::size_t nx = sx.entries().size(), ny = sy.entries().size();
  for (std::size_t k = 0; k < nx; ++k)
    CHECK(std::fabs((reg[k] - bare[k]) - l1 * sx.entries()[k]) < 1e-12);
  for (std::size_t k = 0; k < ny; ++k)
    CHECK(std::fabs((reg[nx + k] - bare[nx + k]) - l2 * sy.entries()[k]) <
          1e-12);
  for (std::size_t k = nx + ny; k < reg.size(); ++k)
    CHECK(reg[k] == bare[k]);
}

TEST_CASE("explicit loss on canonical cases") {
  SeededRng rng(323);
  // Zero network against the unit ratio e1: every sample contributes 1/2.
  const ScoreRatioNetwork zero_net =
      init_network(3, 2, NetworkConfig{2, 1, 1, 4}, rng);
  const LinGaussProblem p = test_problem(3, 2, rng);
  // Power-of-two count keeps the mean exact in floating point.
  const JointSamples batch = sample_lingauss(p, 8, 324);
  const RatioFn unit = [](const Vector& x, const Vector&) {
    Vector e1(x.size(), 0.0);
    e1[0] = 1.0;
    return e1;
  };
  CHECK(explicit_loss(zero_net, batch, unit) == 0.5);
  const RatioFn zero_fn = [](const Vector& x, const Vector&) {
    return Vector(x.size(), 0.0);
  };
  CHECK(explicit_loss(zero_net, batch, zero_fn) == 0.0);
}

TEST_CASE("explicit loss of the zero network estimates half the trace") {
  SeededRng rng(325);
  const LinGaussProblem p = test_problem(4, 3, rng);
  const ScoreRatioNetwork zero_net =
      init_network(4, 3, NetworkConfig{2, 2, 1, 4}, rng);
  const std::size_t count = 100000;
  const JointSamples s = sample_lingauss(p, count, 326);
  const RatioFn ratio = [&p](const Vector& x, const Vector& y) {
    return lingauss_true_ratio(p, x, y);
  };
  const double loss = explicit_loss(zero_net, s, ratio);

  double mean = 0.0, mean_sq = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const Vector w = lingauss_true_ratio(p, s.xs.row(j), s.ys.row(j));
    const double v = 0.5 * dot(w, w);
    mean += v;
    mean_sq += v * v;
  }
  mean /= static_cast<double>(count);
  mean_sq /= static_cast<double>(count);
  const double se =
      std::sqrt((mean_sq - mean * mean) / static_cast<double>(count));
  const double want = 0.5 * trace(lingauss_true_hx(p).matrix);
  CHECK(std::fabs(loss - want) <= 3.0 * se);
}

TEST_CASE("implicit and explicit gradients point the same way") {
  SeededRng rng(327);
  const LinGaussProblem p = test_problem(3, 2, rng);
  const ScoreRatioNetwork net =
      random_network(3, 2, NetworkConfig{3, 2, 2, 8}, rng);
  const RatioFn ratio = [&p](const Vector& x, const Vector& y) {
    return lingauss_true_ratio(p, x, y);
  };
  const Matrix ix = Matrix::identity(3), iy = Matrix::identity(2);

  // Chunked accumulation keeps each tape small; equal chunk sizes make the
  // average of chunk gradients the gradient of the overall mean.
  const std::size_t chunks = 20, chunk = 5000;
  Vector g_imp, g_exp;
  Tape tape;
  for (std::size_t c = 0; c < chunks; ++c) {
    const JointSamples s = sample_lingauss(p, chunk, 5000 + c);
    const Vector gi = objective_value_and_gradient(tape, net, ix, iy, s,
                                                   kGaussian, 0.0, 0.0,
                                                   exact_trace())
                          .gradient;
    const Vector ge = explicit_value_and_gradient(tape, net, s, ratio).gradient;
    if (c == 0) {
      g_imp = gi;
      g_exp = ge;
    } else {
      g_imp = add(g_imp, gi);
      g_exp = add(g_exp, ge);
    }
  }
  CHECK(cosine_similarity(g_imp, g_exp) > 0.9);
}

TEST_CASE("implicit minus explicit loss is parameter-independent") {
  SeededRng rng(328);
  const LinGaussProblem p = test_problem(3, 2, rng);
  const RatioFn ratio = [&p](const Vector& x, const Vector& y) {
    return lingauss_true_ratio(p, x, y);
  };
  const JointSamples s = sample_lingauss(p, 100000, 329);
  const ScoreRatioNetwork net1 =
      random_network(3, 2, NetworkConfig{2, 1, 2, 8}, rng);
  const ScoreRatioNetwork net2 =
      random_network(3, 2, NetworkConfig{3, 2, 1, 6}, rng);

  const double d1 = implicit_loss(net1, s, kGaussian, exact_trace()).total -
                    explicit_loss(net1, s, ratio);
  const double d2 = implicit_loss(net2, s, kGaussian, exact_trace()).total -
                    explicit_loss(net2, s, ratio);
  // Common samples correlate the two Monte Carlo sums, so the gap between
  // the offsets is far below either offset's own spread.
  CHECK(std::fabs(d1 - d2) < 0.05);
  // And the shared offset is -E[1/2 |w_true|^2].
  const double want = -0.5 * trace(lingauss_true_hx(p).matrix);
  CHECK(d1 == doctest::Approx(want).epsilon(0.1));
}

TEST_CASE("linear minimizer recovers the analytic score map") {
  SeededRng rng(330);
  const LinGaussProblem p = test_problem(3, 2, rng);
  const JointSamples s = sample_lingauss(p, 50000, 331);
  const LinearScoreMap map = implicit_linear_minimizer(s);

  const Matrix want_b = -1.0 * matmul(p.at_gamma_inv, p.a);
  const Matrix want_c = p.at_gamma_inv;
  CHECK(rel_frobenius_error(map.b, want_b) < 0.05);
  CHECK(rel_frobenius_error(map.c, want_c) < 0.05);
  CHECK(norm(map.bias) < 0.05 * frobenius_norm(want_b));
}
