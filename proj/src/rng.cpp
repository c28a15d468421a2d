#include "srdr/rng.hpp"

#include <cmath>

namespace srdr {

namespace {

// splitmix64 finalizer (public-domain constants).
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                          std::uint64_t index) {
  std::uint64_t z = mix64(base ^ (static_cast<std::uint64_t>(stream) *
                                  0x9e3779b97f4a7c15ULL));
  return mix64(z ^ (index * 0xd1b54a32d192ed03ULL));
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  // Expand the seed into the four state words with splitmix64 so that nearby
  // seeds still land in unrelated regions of the state space.
  std::uint64_t z = seed;
  for (int i = 0; i < 4; ++i) {
    z = mix64(z);
    s_[i] = z;
  }
}

std::uint64_t SeededRng::next_u64() {
  // xoshiro256++ step.
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 shifted into (0, 1] so the logarithm is always finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

double SeededRng::rademacher() {
  return (next_u64() >> 63) ? 1.0 : -1.0;
}

Vector SeededRng::gaussian_vector(std::size_t k) {
  Vector v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = gaussian();
  return v;
}

Matrix SeededRng::gaussian_matrix(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& e : m.entries()) e = gaussian();
  return m;
}

void fisher_yates(std::vector<std::size_t>& idx, SeededRng& rng) {
  if (idx.size() < 2) return;
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    // Modulo draw: the tiny bias is irrelevant here, determinism is not.
    const std::size_t j = rng.next_u64() % (i + 1);
    std::swap(idx[i], idx[j]);
  }
}

}  // namespace srdr
