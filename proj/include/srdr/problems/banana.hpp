#pragma once

#include <cstdint>

#include "srdr/matrix.hpp"
#include "srdr/samples.hpp"

namespace srdr {

// Embedded banana: x1' standard normal, x2' normal with mean x1'^2 and unit
// variance, the remaining coordinates standard normal, all rotated into
// x = R x'. The distribution involves no observation, so samples carry an
// empty y block. The density only departs from the standard Gaussian along
// span(R e1, R e2).
struct BananaProblem {
  std::size_t dimension = 10;
  Matrix rotation;  // d x d orthogonal
  std::uint64_t seed = 0;
};

// Rotation from the QR factorization of a Gaussian matrix drawn from `seed`.
// Throws InvalidConfig on dimension < 2.
BananaProblem make_banana(std::size_t dimension, std::uint64_t seed);

// Throws DimensionMismatch unless rotation is dimension x dimension,
// NotOrthonormal unless R'R = I within 1e-10.
void validate_banana(const BananaProblem& p);

// Draw j owns the substream (seed, draw, j); within it the order is x1',
// the x2' noise, then the Gaussian tail.
JointSamples sample_banana(const BananaProblem& p, std::size_t count,
                           std::uint64_t seed);

// log(pi/rho)(x) = -(x2' - x1'^2)^2 / 2 + x2'^2 / 2 at x' = R'x, up to the
// constant absorbed by normalization.
double banana_log_ratio(const BananaProblem& p, const Vector& x);

// Analytic score ratio R g(R'x) with
// g(x') = (2 x1'(x2' - x1'^2), x1'^2, 0, ..., 0), the gradient of the log
// ratio above. Throws DimensionMismatch on a wrong input length.
Vector banana_true_ratio(const BananaProblem& p, const Vector& x);

// Monte Carlo (1/N) sum w w' with the analytic ratio on fresh prior draws.
// The ratio lies in span(R e1, R e2), so the rank never exceeds 2.
DiagnosticMatrix banana_true_hx(const BananaProblem& p, std::size_t count,
                                std::uint64_t seed);

}  // namespace srdr
