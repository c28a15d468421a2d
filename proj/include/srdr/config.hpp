#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "srdr/ratio_net.hpp"
#include "srdr/trainer.hpp"

namespace srdr {

enum class ProblemKind { banana, lingauss, darcy, external };
enum class AlgoMode { single, deflate };

// One benchmark family per run. `structure_seed` fixes the randomized parts
// of the problem itself (the banana rotation, the linear-Gaussian forward
// map) independently of the sampling seed, so the same problem instance can
// be rebuilt by every command. Only the fields of the selected kind are
// consulted.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::banana;
  std::size_t count = 1000;          // joint draws written by `generate`
  std::uint64_t structure_seed = 0;

  std::size_t dimension = 10;        // banana parameter dimension

  std::size_t n = 2;                 // lingauss shapes; Gamma = noise * I
  std::size_t m = 2;
  double noise = 0.5;

  std::size_t grid = 17;             // darcy: nodes per side, KL modes,
  std::size_t modes = 16;            // prior (delta I - gamma Lap)^-2, and
  double delta = 0.5;                // observation noise variance. The
  double gamma = 0.1;                // observation grid is the fixed 3x3
  double noise_variance = 1e-3;      // lattice on [0.1, 0.9]^2.

  std::string samples;               // external: path to a samples CSV
};

// Reference diagnostics for `evaluate`. File paths (matrix CSV) take
// precedence and are the only option for problems without an analytic
// ratio; count and seed drive the Monte Carlo reference on the banana.
struct OracleSpec {
  std::string hx;
  std::string hy;
  std::size_t count = 100000;
  std::uint64_t seed = 1;
};

// Everything a command needs. Network sizes of 0 resolve to the full data
// dimension (r' = n, s' = m) once the samples are known.
struct RunConfig {
  ProblemSpec problem;
  std::size_t r_prime = 0;
  std::size_t s_prime = 0;
  std::size_t hidden_layers = 2;
  std::size_t hidden_width = 32;
  TrainConfig train;                 // seed field is overwritten by `seed`
  AlgoMode mode = AlgoMode::single;
  std::size_t rounds = 2;            // deflation rounds T
  std::size_t keep = 1;              // vectors kept per round
  double eps_x = 1e-2;
  double eps_y = 1e-2;
  bool holdout_diagnostics = false;
  OracleSpec oracle;
  std::string output = "out";
  std::uint64_t seed = 0;
};

// Flat `key = value` text. Keys are dotted paths in the sections problem.*,
// net.*, train.*, algo.*, oracle.*, plus the top-level `output` and `seed`.
// Blank lines and lines starting with `#` are skipped. Unknown keys,
// duplicate keys, empty values, and unparsable values are InvalidConfig,
// naming the offending line.
RunConfig parse_run_config(std::istream& in, const std::string& origin);

// Reads, parses, and validates. Throws IoError when the file cannot be
// opened.
RunConfig load_run_config(const std::string& path);

// Structural checks: counts positive, tolerances positive, enum-dependent
// dimension floors, and existence of every referenced file (external
// samples, oracle matrices). Throws InvalidConfig.
void validate_run_config(const RunConfig& cfg);

NetworkConfig resolve_network(const RunConfig& cfg, std::size_t n,
                              std::size_t m);

}  // namespace srdr
