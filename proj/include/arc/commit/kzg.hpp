#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "arc/algebra/group.hpp"
#include "arc/algebra/polynomial.hpp"

namespace arc {

struct DegreeOverflow : std::length_error {
  using std::length_error::length_error;
};

// Structured reference string: (alpha^i * h1) for i = 0..d_max plus alpha * h2.
// The top power is reserved for the hiding randomness, so committed
// polynomials have degree below d_max.
struct KzgParams {
  const PairingGroup* group = nullptr;
  std::vector<G1> powers;
  G2 h2;
  G2 alpha_h2;

  std::size_t max_degree() const { return powers.size() - 1; }
  const G1& h1() const { return powers.front(); }
};

struct KzgOpening {
  G1 proof;
  // Value of the hidden polynomial g(Z) + r Z^d_max at the point; this is what
  // the pairing check verifies.
  Fe value;
};

KzgParams kzg_setup(const PairingGroup& g, std::uint64_t seed, std::size_t d);
// Deterministic setup from a known trapdoor. Test use only.
KzgParams kzg_setup_with_trapdoor(const PairingGroup& g, const Fe& alpha, std::size_t d);
// Serial power computation, kept for benchmarking the parallel ladder.
KzgParams kzg_setup_reference(const PairingGroup& g, const Fe& alpha, std::size_t d);

// (g(alpha) + r alpha^d_max) h1
G1 kzg_commit(const KzgParams& pp, const Polynomial& g, const Fe& r);
// Same, from coefficients placed at degrees offset, offset+1, ...
G1 kzg_commit_values(const KzgParams& pp, std::span<const Fe> values, std::size_t offset, const Fe& r);

// Requires g(x) == y, otherwise throws NonZeroRemainder.
KzgOpening kzg_prove(const KzgParams& pp, const Polynomial& g, const Fe& r, const Fe& x, const Fe& y);

// e(proof, alpha h2 - x h2) == e(c - value h1, h2)
bool kzg_check(const KzgParams& pp, const G1& c, const Fe& x, const Fe& value, const G1& proof);

}  // namespace arc
