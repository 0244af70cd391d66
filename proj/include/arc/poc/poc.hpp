#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "arc/commit/kzg.hpp"
#include "arc/commit/mimc.hpp"
#include "arc/commit/pedersen.hpp"
#include "arc/mpc/engine.hpp"

namespace arc::poc {

// Poly: KZG consistency check. Hash: recompute an algebraic hash commitment
// inside MPC. Pedersen: per-element commitments folded under a challenge.
enum class Backend { Poly, Hash, Pedersen };

const char* to_string(Backend b);
Backend backend_from_string(std::string_view s);

struct PocParams {
  Backend backend = Backend::Poly;
  const PairingGroup* group = nullptr;
  std::size_t d = 0;   // elements per chunk (Poly) or generator count (Pedersen)
  KzgParams kzg;       // Poly only
  PedersenParams ped;  // Pedersen only

  const PrimeField& field() const { return group->scalar_field(); }
};

// Poly reserves degree 0 (unused by the committed polynomial, which carries
// x_i at degree i) and the top degree d + 1 for hiding randomness.
PocParams poc_setup(Backend b, const PairingGroup& g, std::uint64_t seed, std::size_t d);

// Poly: one point per chunk of d elements. Hash: one digest.
// Pedersen: one point per element.
struct PocCommitment {
  Backend backend = Backend::Poly;
  std::vector<G1> points;
  std::optional<Fe> digest;

  Bytes to_bytes() const;
  void write(ByteWriter& w) const;
  static PocCommitment read(const PairingGroup& g, ByteReader& r);
  bool operator==(const PocCommitment&) const = default;
};

struct Witness {
  std::vector<Fe> x;
  std::vector<Fe> r;
};

std::size_t chunk_count(const PocParams& pp, std::size_t n);
std::size_t randomness_size(const PocParams& pp, std::size_t n);
std::vector<Fe> sample_randomness(const PocParams& pp, std::size_t n, Rng& rng);
PocCommitment poc_commit(const PocParams& pp, std::span<const Fe> x, std::span<const Fe> r);
// Commitment to a shared vector under shared randomness, computed by the
// committee and opened to all of it. Poly and Pedersen commit share-wise and
// open the sum; Hash evaluates the hash inside MPC.
PocCommitment poc_commit_shared(mpc::Engine& e, const PocParams& pp, const mpc::FShared& x, const mpc::FShared& r);

struct Blame {
  enum class Kind { Prover, ComputingParty };
  Kind kind = Kind::Prover;
  std::size_t party = 0;  // computing party index when kind == ComputingParty
  bool operator==(const Blame&) const = default;
};

struct CheckTranscript {
  Backend backend = Backend::Poly;
  Fe beta;
  std::vector<Fe> rho;      // Poly: opened masked evaluation per chunk
  std::vector<G1> c_omega;  // Poly: mask commitments per chunk
  std::vector<G1> proofs;   // Poly: opening proofs per chunk
  std::optional<G1> opened_commitment;  // Pedersen: c'
  std::optional<Fe> opened_digest;      // Hash
  std::vector<std::size_t> failed_chunks;
  bool accept = false;
  std::optional<Blame> blame;  // only under identifiable abort
  mpc::Stats cost;

  nlohmann::json to_json() const;
};

// Runs the consistency check of `c` against the shared vector `x`. The
// prover holds `w` and draws its masks from `prover_rng`; `prover_party` is
// its committee index when it is also a computing party.
//
// Blame under identifiable abort: a failed opening proof or commitment
// comparison blames the prover; otherwise a flagged opening blames the
// computing party that sent the bad share.
CheckTranscript poc_check(mpc::Engine& e, const PocParams& pp, const PocCommitment& c, const mpc::FShared& x,
                          const Witness& w, Rng& prover_rng, std::optional<std::size_t> prover_party = std::nullopt);

struct BatchResult {
  bool accept = false;
  bool batch_passed = false;
  std::vector<std::size_t> failed;  // indices failing the individual fallback
};

// Aggregates N openings at a common point with powers of gamma and checks one
// pairing equation; on failure falls back to individual checks.
BatchResult batch_verify(const KzgParams& pp, std::span<const G1> cs, const Fe& beta, std::span<const Fe> rhos,
                         std::span<const G1> proofs, const Fe& gamma);

// Algebraic hash commitment evaluated inside MPC (two Beaver products per
// permutation round).
mpc::FShared mpc_hash_commit(mpc::Engine& e, const mpc::FShared& x, const mpc::FShared& r);

}  // namespace arc::poc
