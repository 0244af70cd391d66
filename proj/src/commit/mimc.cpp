#include "arc/commit/mimc.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace arc {

MimcSponge::MimcSponge(const PrimeField& f) : f_(&f) {
  k_.reserve(kRounds);
  k_.push_back(Fe::zero(f));
  for (unsigned i = 1; i < kRounds; ++i) {
    ByteWriter w;
    w.u32(i);
    k_.push_back(Fe::from_bytes_reduce(f, sha256("arc/mimc/round", w.bytes())));
  }
}

const MimcSponge& MimcSponge::for_field(const PrimeField& f) {
  static std::mutex mu;
  static std::map<const PrimeField*, std::unique_ptr<MimcSponge>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[&f];
  if (!slot) slot = std::make_unique<MimcSponge>(f);
  return *slot;
}

std::pair<Fe, Fe> MimcSponge::permute(Fe l, Fe r) const {
  for (const auto& k : k_) {
    Fe t = l + k;
    Fe next = r + t * t * t;
    r = l;
    l = next;
  }
  return {l, r};
}

Fe MimcSponge::commit(std::span<const Fe> m, const Fe& r) const {
  Fe rate = Fe::zero(*f_);
  Fe cap = Fe::from_u64(*f_, m.size());
  auto absorb = [&](const Fe& x) { std::tie(rate, cap) = permute(rate + x, cap); };
  for (const auto& x : m) absorb(x);
  absorb(r);
  return rate;
}

}  // namespace arc
