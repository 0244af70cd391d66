#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "arc/algebra/field.hpp"
#include "arc/algebra/group.hpp"
#include "arc/algebra/ring.hpp"

namespace arc::mpc {

struct DomainMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Additive shares of a vector over F_p: s[party][index].
struct FShared {
  const PrimeField* f = nullptr;
  std::vector<std::vector<Fe>> s;

  std::size_t parties() const { return s.size(); }
  std::size_t size() const { return s.empty() ? 0 : s[0].size(); }
  const PrimeField& field() const { return *f; }

  static FShared zeros(const PrimeField& f, std::size_t parties, std::size_t n);
  // Public vector held entirely by party 0.
  static FShared constant(const PrimeField& f, std::size_t parties, std::span<const Fe> v);

  FShared slice(std::size_t lo, std::size_t n) const;
  FShared element(std::size_t i) const { return slice(i, 1); }
  FShared& append(const FShared& o);
  // Test-mode reconstruction without going through an opening.
  std::vector<Fe> reveal_for_testing() const;

  FShared& operator+=(const FShared& o);
  FShared& operator-=(const FShared& o);
  FShared scale(const Fe& c) const;
  FShared add_public(std::span<const Fe> v) const;
  friend FShared operator+(FShared a, const FShared& b) { return a += b; }
  friend FShared operator-(FShared a, const FShared& b) { return a -= b; }
};

// Public linear combination sum_j coeffs[j] * vs[j]; purely local.
FShared lincomb(std::span<const Fe> coeffs, std::span<const FShared> vs);
// sum_i coeffs[i] * v[i] over the entries of one vector, as a length-1 sharing.
FShared inner_public(std::span<const Fe> coeffs, const FShared& v);

// Additive shares over Z_{2^k}.
struct RShared {
  unsigned k = 64;
  std::vector<std::vector<std::uint64_t>> s;

  std::size_t parties() const { return s.size(); }
  std::size_t size() const { return s.empty() ? 0 : s[0].size(); }
  std::uint64_t mask() const { return RingElement::mask(k); }

  static RShared zeros(std::size_t parties, std::size_t n, unsigned k = 64);
  static RShared constant(std::size_t parties, std::span<const std::uint64_t> v, unsigned k = 64);

  RShared slice(std::size_t lo, std::size_t n) const;
  RShared element(std::size_t i) const { return slice(i, 1); }
  RShared& append(const RShared& o);
  RShared gather(std::span<const std::size_t> idx) const;
  std::vector<std::uint64_t> reveal_for_testing() const;

  RShared& operator+=(const RShared& o);
  RShared& operator-=(const RShared& o);
  RShared operator-() const;
  RShared scale(std::uint64_t c) const;
  RShared scale_each(std::span<const std::uint64_t> c) const;
  RShared add_public(std::span<const std::uint64_t> v) const;
  RShared add_public(std::uint64_t c) const;
  // Sum of consecutive groups of `width` entries.
  RShared sum_groups(std::size_t width) const;
  // Entry i repeated `times` times, for i in order.
  RShared repeat_each(std::size_t times) const;
  friend RShared operator+(RShared a, const RShared& b) { return a += b; }
  friend RShared operator-(RShared a, const RShared& b) { return a -= b; }
};

// XOR shares of n bits, packed 64 per word: s[party][word].
struct BShared {
  std::size_t n = 0;
  std::vector<std::vector<std::uint64_t>> s;

  std::size_t parties() const { return s.size(); }
  std::size_t size() const { return n; }
  std::size_t words() const { return (n + 63) / 64; }

  static BShared zeros(std::size_t parties, std::size_t n);
  // Public bits held by party 0.
  static BShared constant(std::size_t parties, std::size_t n, std::span<const std::uint64_t> words);

  std::vector<std::uint64_t> reveal_for_testing() const;

  BShared& operator^=(const BShared& o);
  friend BShared operator^(BShared a, const BShared& b) { return a ^= b; }
  BShared xor_public(std::span<const std::uint64_t> words) const;
  BShared flip() const;  // NOT
  BShared and_public(std::span<const std::uint64_t> words) const;
};

// Additive shares of group elements.
struct GShared {
  std::vector<std::vector<G1>> s;
  std::size_t parties() const { return s.size(); }
  std::size_t size() const { return s.empty() ? 0 : s[0].size(); }
  std::vector<G1> reveal_for_testing() const;
};

inline std::uint64_t word_mask(std::size_t n, std::size_t w) {
  std::size_t rem = n - 64 * w;
  return rem >= 64 ? ~0ULL : ((1ULL << rem) - 1);
}

inline bool get_bit(std::span<const std::uint64_t> words, std::size_t i) {
  return (words[i / 64] >> (i % 64)) & 1;
}

}  // namespace arc::mpc
