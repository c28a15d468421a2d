#include "srdr/problems/banana.hpp"

#include "srdr/errors.hpp"
#include "srdr/linalg.hpp"
#include "srdr/rng.hpp"

namespace srdr {

namespace {

Vector ratio_unchecked(const BananaProblem& p, const Vector& x) {
  const Vector xp = matvec_t(p.rotation, x);
  Vector g(p.dimension, 0.0);
  g[0] = 2.0 * xp[0] * (xp[1] - xp[0] * xp[0]);
  g[1] = xp[0] * xp[0];
  return matvec(p.rotation, g);
}

}  // namespace

BananaProblem make_banana(std::size_t dimension, std::uint64_t seed) {
  if (dimension < 2)
    throw InvalidConfig("the banana needs the two structured coordinates");
  BananaProblem p;
  p.dimension = dimension;
  p.seed = seed;
  SeededRng rng(seed);
  p.rotation = random_rotation(dimension, rng);
  return p;
}

void validate_banana(const BananaProblem& p) {
  const std::size_t d = p.dimension;
  if (d < 2) throw InvalidConfig("the banana needs at least two coordinates");
  if (p.rotation.rows() != d || p.rotation.cols() != d)
    throw DimensionMismatch("rotation must be square of the problem size");
  const Matrix gram = matmul(transpose(p.rotation), p.rotation);
  if (max_abs_diff(gram, Matrix::identity(d)) > 1e-10)
    throw NotOrthonormal("rotation columns must be orthonormal");
}

JointSamples sample_banana(const BananaProblem& p, std::size_t count,
                           std::uint64_t seed) {
  validate_banana(p);
  if (count < 1) throw InvalidConfig("sample count must be at least 1");
  const std::size_t d = p.dimension;
  JointSamples s{Matrix(count, d), Matrix(count, 0)};
  Vector xp(d);
  for (std::size_t j = 0; j < count; ++j) {
    SeededRng draw(derive_seed(seed, Stream::draw, j));
    xp[0] = draw.gaussian();
    xp[1] = xp[0] * xp[0] + draw.gaussian();
    for (std::size_t k = 2; k < d; ++k) xp[k] = draw.gaussian();
    s.xs.set_row(j, matvec(p.rotation, xp));
  }
  return s;
}

double banana_log_ratio(const BananaProblem& p, const Vector& x) {
  validate_banana(p);
  if (x.size() != p.dimension)
    throw DimensionMismatch("input length must match the problem dimension");
  const Vector xp = matvec_t(p.rotation, x);
  const double bend = xp[1] - xp[0] * xp[0];
  return -0.5 * bend * bend + 0.5 * xp[1] * xp[1];
}

Vector banana_true_ratio(const BananaProblem& p, const Vector& x) {
  validate_banana(p);
  if (x.size() != p.dimension)
    throw DimensionMismatch("input length must match the problem dimension");
  return ratio_unchecked(p, x);
}

DiagnosticMatrix banana_true_hx(const BananaProblem& p, std::size_t count,
                                std::uint64_t seed) {
  const JointSamples s = sample_banana(p, count, seed);  // validates p
  const std::size_t d = p.dimension;
  Matrix acc(d, d);
  for (std::size_t j = 0; j < count; ++j) {
    const Vector w = ratio_unchecked(p, s.xs.row(j));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) acc(i, k) += w[i] * w[k];
  }
  const double inv = 1.0 / static_cast<double>(count);
  return DiagnosticMatrix{DiagnosticKind::cdr_parameter, inv * acc, count};
}

}  // namespace srdr
