#pragma once

#include <cstdint>
#include <vector>

#include "srdr/matrix.hpp"

namespace srdr {

// Named substreams used when deriving child seeds from a run seed, so that
// every consumer of randomness (initialization, shuffling, slicing, sample
// draws) owns an independent, reproducible stream.
enum class Stream : std::uint64_t {
  net_init = 1,
  shuffle = 2,
  split = 3,
  slice = 4,
  val_slice = 5,
  draw = 6,
  round = 7,
  noise = 8,
};

// Deterministic seed derivation: mixes (base, stream, index) through the
// splitmix64 finalizer. Identical inputs give identical child seeds on all
// platforms.
std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                          std::uint64_t index = 0);

// xoshiro256++ generator seeded through splitmix64. The full state is a
// deterministic function of the 64-bit seed, so identical seeds produce
// bit-identical streams across runs and platforms.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller. Each uniform pair yields two normals;
  // the second is cached and returned by the next call, which fixes the
  // pairing of uniforms to outputs.
  double gaussian();
  // +1 or -1 with equal probability.
  double rademacher();

  Vector gaussian_vector(std::size_t k);
  Matrix gaussian_matrix(std::size_t rows, std::size_t cols);

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// In-place Fisher-Yates shuffle driven by the given generator.
void fisher_yates(std::vector<std::size_t>& idx, SeededRng& rng);

}  // namespace srdr
