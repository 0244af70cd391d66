#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace arc {

// All randomness in the simulator flows from seeded Mersenne twisters. The
// helpers below avoid the implementation-defined std distributions so that
// transcripts are identical across standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) return rng();
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng);

// Derives an independent child seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label);

template <class T>
void shuffle(std::span<T> v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_below(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace arc
