#pragma once

#include <span>
#include <vector>

#include "arc/commit/kzg.hpp"
#include "arc/commit/pedersen.hpp"
#include "arc/mpc/engine.hpp"

namespace arc::mpc {

// Bit planes: planes[j] holds bit j of every element.
using BitPlanes = std::vector<BShared>;

// Public bit plane j of a vector of integers.
std::vector<std::uint64_t> public_plane(std::span<const std::uint64_t> values, unsigned j);
std::vector<std::uint64_t> public_plane(std::span<const unsigned __int128> values, unsigned j);

// Ripple-carry adder: public + shared, modulo 2^width. One AND per bit.
BitPlanes add_public_shared(Engine& e, const std::vector<std::vector<std::uint64_t>>& pub, const BitPlanes& sh,
                            unsigned width, bool carry_in = false);
// Ripple-carry adder: shared + shared, modulo 2^width. One AND per bit.
BitPlanes add_shared(Engine& e, const BitPlanes& a, const BitPlanes& b, unsigned width);

BShared concat_bits(std::span<const BShared> parts);
BShared slice_bits(const BShared& b, std::size_t lo, std::size_t n);
// OR of all planes, element-wise, via a log-depth AND tree.
BShared or_all(Engine& e, std::span<const BShared> planes);

// Ring bit decomposition via an edaBit mask: open x - r, then add.
BitPlanes bit_decompose(Engine& e, const RShared& x);
// Binary -> arithmetic (ring) conversion via daBits.
RShared bits_to_ring(Engine& e, const BShared& b, unsigned k = 64);
// 1 if x < 0 (two's complement), else 0, as a ring sharing.
RShared ltz(Engine& e, const RShared& x);
// x / 2^f rounded toward zero, exactly.
RShared trunc_exact(Engine& e, const RShared& x, unsigned f);
RShared mul_trunc(Engine& e, const RShared& a, const RShared& b, unsigned f);

// Signed Z_{2^64} -> F_p conversion for |x| < 2^(l-1), masking with l + kappa
// bits. Requires 2^(l + kappa + 1) < p. `masked`, when given, receives the
// publicly opened masked values.
FShared ring_to_field(Engine& e, const RShared& x, unsigned l = 64, unsigned kappa = 40,
                      std::vector<unsigned __int128>* masked = nullptr);
// Inverse direction by bit recomposition in the ring.
RShared field_to_ring(Engine& e, const FShared& x, unsigned l = 64, unsigned kappa = 40);

// EC-MPC commitments: every party commits to its own shares locally.
GShared dist_commit_pedersen(const PedersenParams& pp, const FShared& m, const FShared& r);
GShared dist_commit_kzg(const KzgParams& pp, const FShared& values, std::size_t offset, const FShared& r);

}  // namespace arc::mpc
