#include "srdr/problems/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "srdr/errors.hpp"
#include "srdr/linalg.hpp"
#include "srdr/rng.hpp"

namespace srdr {

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

std::vector<ObsPoint> default_observation_grid() {
  std::vector<ObsPoint> points;
  for (double xi2 : {0.1, 0.5, 0.9})
    for (double xi1 : {0.1, 0.5, 0.9}) points.push_back({xi1, xi2});
  return points;
}

void validate_darcy(const DarcyProblem& p) {
  if (p.grid < 3) throw InvalidConfig("grid needs interior nodes");
  if (p.n_kl < 1) throw InvalidConfig("at least one KL mode required");
  if (!(p.delta > 0.0) || !(p.gamma > 0.0))
    throw InvalidConfig("covariance parameters must be positive");
  if (!(p.noise_variance >= 0.0))
    throw InvalidConfig("noise variance must be nonnegative");
  if (p.observations.empty())
    throw InvalidConfig("at least one observation point required");
  for (const ObsPoint& pt : p.observations)
    if (!(pt.xi1 > 0.0) || !(pt.xi1 < 1.0) || !(pt.xi2 > 0.0) ||
        !(pt.xi2 < 1.0))
      throw InvalidConfig("observation points must lie inside (0,1)^2");
}

KlModes kl_modes(const DarcyProblem& p) {
  validate_darcy(p);
  const std::size_t g = p.grid;
  const double h = 1.0 / static_cast<double>(g - 1);
  const double pi = std::numbers::pi;

  // Enumerate enough (k, l) pairs to cover the n_kl largest eigenvalues:
  // eigenvalues decrease with k^2 + l^2, so a square window of side n_kl
  // always contains the winners.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> order;
  for (std::size_t k = 0; k <= p.n_kl; ++k)
    for (std::size_t l = 0; l <= p.n_kl; ++l)
      order.emplace_back(k * k + l * l, k, l);
  std::sort(order.begin(), order.end());

  KlModes out;
  out.eigenvalues.resize(p.n_kl);
  out.modes = Matrix(g * g, p.n_kl);
  for (std::size_t idx = 0; idx < p.n_kl; ++idx) {
    const auto [freq, k, l] = order[idx];
    const double op = p.delta + p.gamma * pi * pi * static_cast<double>(freq);
    out.eigenvalues[idx] = 1.0 / (op * op);
    Vector phi(g * g);
    double nrm2 = 0.0;
    for (std::size_t r = 0; r < g; ++r)
      for (std::size_t c = 0; c < g; ++c) {
        const double v = std::cos(pi * static_cast<double>(k) *
                                  static_cast<double>(c) * h) *
                         std::cos(pi * static_cast<double>(l) *
                                  static_cast<double>(r) * h);
        phi[r * g + c] = v;
        nrm2 += v * v;
      }
    const double inv = 1.0 / std::sqrt(nrm2);
    for (std::size_t i = 0; i < g * g; ++i)
      out.modes(i, idx) = phi[i] * inv;
  }
  return out;
}

DarcyProblem make_darcy() {
  return make_darcy(17, 16, 0.5, 0.1, default_observation_grid(), 1e-3);
}

DarcyProblem make_darcy(std::size_t grid, std::size_t n_kl, double delta,
                        double gamma, std::vector<ObsPoint> observations,
                        double noise_variance) {
  DarcyProblem p;
  p.grid = grid;
  p.n_kl = n_kl;
  p.delta = delta;
  p.gamma = gamma;
  p.observations = std::move(observations);
  p.noise_variance = noise_variance;
  const KlModes modes = kl_modes(p);  // validates
  p.kl_modes_nodal = modes.modes;
  p.kl_eigenvalues = modes.eigenvalues;
  return p;
}

Matrix solve_darcy(const DarcyProblem& p, const Matrix& log_permeability) {
  const std::size_t g = p.grid;
  if (log_permeability.rows() != g || log_permeability.cols() != g)
    throw DimensionMismatch("permeability field must match the grid");

  Matrix kappa(g, g);
  for (std::size_t r = 0; r < g; ++r)
    for (std::size_t c = 0; c < g; ++c)
      kappa(r, c) = std::exp(log_permeability(r, c));

  // Unknowns are the interior rows 1..g-2 over every column; the bottom row
  // is pinned to 0, the top row to 1.
  const std::size_t unknowns = g * (g - 2);
  const auto uid = [g](std::size_t r, std::size_t c) {
    return (r - 1) * g + c;
  };
  BandedSpdSolver solver(unknowns, g);
  Vector diag(unknowns, 0.0);
  Vector rhs(unknowns, 0.0);

  // Horizontal faces within an unknown row: full face area.
  for (std::size_t r = 1; r + 1 < g; ++r)
    for (std::size_t c = 0; c + 1 < g; ++c) {
      const double cond = harmonic(kappa(r, c), kappa(r, c + 1));
      diag[uid(r, c)] += cond;
      diag[uid(r, c + 1)] += cond;
      solver.at(uid(r, c + 1), uid(r, c)) = -cond;
    }

  // Vertical faces: halved area in the zero-flux boundary columns (their
  // control volumes are half cells), which keeps the assembly symmetric.
  for (std::size_t c = 0; c < g; ++c) {
    const double area = (c == 0 || c + 1 == g) ? 0.5 : 1.0;
    for (std::size_t r = 0; r + 1 < g; ++r) {
      const double cond = area * harmonic(kappa(r, c), kappa(r + 1, c));
      const bool lower_known = r == 0;       // u = 0 on the bottom edge
      const bool upper_known = r + 1 == g - 1;  // u = 1 on the top edge
      if (!lower_known) diag[uid(r, c)] += cond;
      if (!upper_known) diag[uid(r + 1, c)] += cond;
      if (lower_known) continue;  // zero Dirichlet value adds nothing
      if (upper_known)
        rhs[uid(r, c)] += cond;
      else
        solver.at(uid(r + 1, c), uid(r, c)) = -cond;
    }
  }
  for (std::size_t i = 0; i < unknowns; ++i) solver.at(i, i) = diag[i];

  solver.factor();
  const Vector u = solver.solve(rhs);

  Matrix pressure(g, g);
  for (std::size_t c = 0; c < g; ++c) pressure(g - 1, c) = 1.0;
  for (std::size_t r = 1; r + 1 < g; ++r)
    for (std::size_t c = 0; c < g; ++c) pressure(r, c) = u[uid(r, c)];

  // Certify the solve: every interior flux balance must close.
  double res2 = 0.0;
  for (std::size_t r = 1; r + 1 < g; ++r)
    for (std::size_t c = 0; c < g; ++c) {
      double flux = 0.0;
      if (c > 0)
        flux += harmonic(kappa(r, c - 1), kappa(r, c)) *
                (pressure(r, c - 1) - pressure(r, c));
      if (c + 1 < g)
        flux += harmonic(kappa(r, c), kappa(r, c + 1)) *
                (pressure(r, c + 1) - pressure(r, c));
      const double area = (c == 0 || c + 1 == g) ? 0.5 : 1.0;
      flux += area * harmonic(kappa(r - 1, c), kappa(r, c)) *
              (pressure(r - 1, c) - pressure(r, c));
      flux += area * harmonic(kappa(r, c), kappa(r + 1, c)) *
              (pressure(r + 1, c) - pressure(r, c));
      res2 += flux * flux;
    }
  const double rhs_norm = norm(rhs);
  if (std::sqrt(res2) > 1e-10 * (rhs_norm > 0.0 ? rhs_norm : 1.0))
    throw SolveFailure("pressure solve missed the flux-balance tolerance");
  return pressure;
}

double interpolate_nodal(const Matrix& field, double xi1, double xi2) {
  const std::size_t g = field.rows();
  if (field.cols() != g || g < 2)
    throw DimensionMismatch("nodal field must be square");
  const double h = 1.0 / static_cast<double>(g - 1);
  const auto cell = [&](double xi) {
    std::size_t i = static_cast<std::size_t>(xi / h);
    if (i + 2 > g) i = g - 2;
    return i;
  };
  const std::size_t c = cell(xi1), r = cell(xi2);
  const double t = xi1 / h - static_cast<double>(c);
  const double s = xi2 / h - static_cast<double>(r);
  return (1.0 - s) * ((1.0 - t) * field(r, c) + t * field(r, c + 1)) +
         s * ((1.0 - t) * field(r + 1, c) + t * field(r + 1, c + 1));
}

Vector darcy_forward(const DarcyProblem& p, const Vector& x) {
  if (x.size() != p.n_kl)
    throw DimensionMismatch("coefficient vector must have n_kl entries");
  const std::size_t g = p.grid;
  Vector weights(p.n_kl);
  for (std::size_t k = 0; k < p.n_kl; ++k)
    weights[k] = x[k] * std::sqrt(p.kl_eigenvalues[k]);
  const Vector flat = matvec(p.kl_modes_nodal, weights);
  Matrix field(g, g);
  for (std::size_t r = 0; r < g; ++r)
    for (std::size_t c = 0; c < g; ++c) field(r, c) = flat[r * g + c];
  const Matrix pressure = solve_darcy(p, field);
  Vector y(p.observations.size());
  for (std::size_t k = 0; k < p.observations.size(); ++k)
    y[k] = interpolate_nodal(pressure, p.observations[k].xi1,
                             p.observations[k].xi2);
  return y;
}

JointSamples sample_darcy(const DarcyProblem& p, std::size_t count,
                          std::uint64_t seed) {
  validate_darcy(p);
  if (p.kl_modes_nodal.cols() != p.n_kl)
    throw InvalidConfig("problem is missing its KL modes; use make_darcy");
  if (count < 1) throw InvalidConfig("sample count must be at least 1");
  const std::size_t m = p.observations.size();
  const double noise_sd = std::sqrt(p.noise_variance);
  JointSamples s{Matrix(count, p.n_kl), Matrix(count, m)};
  for (std::size_t j = 0; j < count; ++j) {
    SeededRng draw(derive_seed(seed, Stream::draw, j));
    const Vector x = draw.gaussian_vector(p.n_kl);
    Vector y = darcy_forward(p, x);
    for (std::size_t k = 0; k < m; ++k) y[k] += noise_sd * draw.gaussian();
    s.xs.set_row(j, x);
    s.ys.set_row(j, y);
  }
  return s;
}

}  // namespace srdr
