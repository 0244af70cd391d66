#include "arc/commit/pedersen.hpp"

#include <stdexcept>

#include "arc/algebra/msm.hpp"
#include "arc/commit/kzg.hpp"

namespace arc {

PedersenParams pedersen_setup(const PairingGroup& g, std::size_t d, std::string_view tag) {
  PedersenParams pp;
  pp.group = &g;
  pp.generators.reserve(d + 1);
  for (std::size_t i = 0; i <= d; ++i) {
    if (g.is_mock()) {
      pp.generators.push_back(G1::from_exponent(g, Fe::from_u64(g.scalar_field(), i + 2)));
    } else {
      ByteWriter w;
      w.u64(i);
      pp.generators.push_back(g.hash_to_g1(tag, w.bytes()));
    }
  }
  return pp;
}

G1 pedersen_commit(const PedersenParams& pp, std::span<const Fe> m, const Fe& r) {
  if (m.size() > pp.capacity()) throw DegreeOverflow("pedersen_commit: message longer than parameters");
  G1 c = msm(*pp.group, m, std::span<const G1>(pp.generators).subspan(1, m.size()));
  return c + pp.blinding().mul(r);
}

bool pedersen_verify(const PedersenParams& pp, const G1& c, std::span<const Fe> m, const Fe& r) {
  if (m.size() > pp.capacity()) return false;
  return pedersen_commit(pp, m, r) == c;
}

}  // namespace arc
