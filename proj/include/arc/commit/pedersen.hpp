#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "arc/algebra/group.hpp"

namespace arc {

// Generators h0 (blinding) and h1..hd (message slots).
struct PedersenParams {
  const PairingGroup* group = nullptr;
  std::vector<G1> generators;

  std::size_t capacity() const { return generators.size() - 1; }
  const G1& blinding() const { return generators.front(); }
};

// Curve backend: hash-to-curve under `tag`. Mock backend: h_i = (i + 2) * h1,
// whose logs are public, so mock commitments are not binding.
PedersenParams pedersen_setup(const PairingGroup& g, std::size_t d, std::string_view tag = "arc/pedersen/v1");

// r h0 + sum m_i h_i
G1 pedersen_commit(const PedersenParams& pp, std::span<const Fe> m, const Fe& r);
bool pedersen_verify(const PedersenParams& pp, const G1& c, std::span<const Fe> m, const Fe& r);

}  // namespace arc
