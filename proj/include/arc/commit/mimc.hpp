#pragma once

#include <span>
#include <utility>
#include <vector>

#include "arc/algebra/field.hpp"

namespace arc {

// MiMC-style Feistel permutation over F_p^2 with cube round function,
// used as a rate-1 / capacity-1 sponge for an algebraic hash commitment.
//   round i: (L, R) <- (R + (L + k_i)^3, L)
// The Feistel structure makes every round a permutation regardless of
// whether cubing is a bijection on F_p.
class MimcSponge {
 public:
  static constexpr unsigned kRounds = 73;

  explicit MimcSponge(const PrimeField& f);
  static const MimcSponge& for_field(const PrimeField& f);

  const PrimeField& field() const { return *f_; }
  const std::vector<Fe>& round_constants() const { return k_; }

  std::pair<Fe, Fe> permute(Fe l, Fe r) const;
  // Initial state (0, len(m)); absorbs m then r into the rate element.
  Fe commit(std::span<const Fe> m, const Fe& r) const;

 private:
  const PrimeField* f_;
  std::vector<Fe> k_;
};

inline Fe hash_commit(std::span<const Fe> m, const Fe& r) {
  return MimcSponge::for_field(r.field()).commit(m, r);
}

}  // namespace arc
