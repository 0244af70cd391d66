#pragma once

#include <nlohmann/json.hpp>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/algebra/rng.hpp"
#include "arc/mpc/shares.hpp"

namespace arc::mpc {

enum class Mode { SemiHonest, WithAbort, Identifiable };

const char* to_string(Mode m);

// Unidentified abort raised by an opening whose consistency check fails.
struct Abort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IdentifiedAbort : Abort {
  IdentifiedAbort(std::size_t p, const std::string& what) : Abort(what), party(p) {}
  std::size_t party;
};

struct TripleExhausted : std::runtime_error {
  TripleExhausted() : std::runtime_error("dealer ran out of multiplication triples") {}
};

struct CoinDisagreement : std::logic_error {
  CoinDisagreement() : std::logic_error("parties disagree on a public coin") {}
};

struct RangeViolation : std::range_error {
  using std::range_error::range_error;
};

struct Stats {
  std::uint64_t rounds = 0;
  std::uint64_t opened_values = 0;  // explicit openings only
  std::uint64_t multiplications = 0;
  std::uint64_t and_gates = 0;
  std::uint64_t inputs = 0;
  std::uint64_t coins = 0;
  std::vector<std::uint64_t> bytes_sent;  // per computing party
  std::uint64_t external_bytes = 0;       // sent by input owners outside the committee

  std::uint64_t max_bytes_per_party() const;
  Stats operator-(const Stats& base) const;
};

// Corrupts the broadcast share of `party` on explicit openings, after
// skipping the first `skip` such openings, for `count` openings.
struct OpenTamper {
  std::size_t party = 0;
  std::uint64_t skip = 0;
  std::uint64_t count = 1;
};

struct EngineConfig {
  std::size_t parties = 3;
  std::uint64_t seed = 1;
  Mode mode = Mode::SemiHonest;
  std::optional<std::uint64_t> triple_budget{};
  bool record_transcript = false;
};

// Result of an opening under identifiable abort when the caller wants to
// decide blame itself.
struct CheckedOpen {
  std::vector<Fe> values;  // authentic reconstruction
  std::vector<std::size_t> culprits;
};

struct CheckedGroupOpen {
  std::vector<G1> values;
  std::vector<std::size_t> culprits;
};

// Simulated arithmetic black box. All parties run in lockstep in one thread;
// a trusted dealer supplies correlated randomness and public coins.
class Engine {
 public:
  Engine(const PrimeField& f, EngineConfig cfg = {});

  std::size_t parties() const { return cfg_.parties; }
  const PrimeField& field() const { return *f_; }
  Mode mode() const { return cfg_.mode; }
  void set_mode(Mode m) { cfg_.mode = m; }
  const Stats& stats() const { return stats_; }
  std::uint64_t seed() const { return cfg_.seed; }

  void set_open_tamper(std::optional<OpenTamper> t) {
    tamper_ = t;
    explicit_opens_ = 0;
  }
  // Makes `party` see a different value for the next coin.
  void set_coin_fault(std::optional<std::size_t> party) { coin_fault_ = party; }

  // ---- field domain ----
  // Owner is a computing party index, or nullopt for an outside input party.
  FShared input(std::optional<std::size_t> owner, std::span<const Fe> x);
  FShared rand_shared(std::size_t n);
  Fe coin();
  std::uint64_t coin_u64();
  // Internal openings (explicit_open = false) are part of a sub-protocol:
  // they cost a round but are not counted as opened values and are never
  // tampered with.
  std::vector<Fe> open(const FShared& v, bool explicit_open = true);
  // Opening towards outside recipients; an empty recipient count is a no-op.
  std::vector<Fe> open_to(const FShared& v, std::size_t recipients);
  // Under identifiable abort, reports culprits instead of throwing.
  CheckedOpen open_checked(const FShared& v, bool explicit_open = true);
  FShared mul(const FShared& a, const FShared& b);

  // ---- ring domain ----
  RShared input_ring(std::optional<std::size_t> owner, std::span<const std::uint64_t> x, unsigned k = 64);
  std::vector<std::uint64_t> open_ring(const RShared& v, bool explicit_open = true);
  std::vector<std::uint64_t> open_ring_to(const RShared& v, std::size_t recipients);
  RShared mul_ring(const RShared& a, const RShared& b);

  // ---- binary domain ----
  BShared and_bits(const BShared& a, const BShared& b);
  std::vector<std::uint64_t> open_bits(const BShared& v, bool explicit_open = false);

  // ---- group domain ----
  std::vector<G1> open_group(const GShared& v);
  CheckedGroupOpen open_group_checked(const GShared& v);

  // ---- preprocessing ----
  struct RingEdaBits {
    RShared r;
    std::vector<BShared> bits;  // bits[j] holds bit j of every r
  };
  RingEdaBits edabits_ring(std::size_t n, unsigned k = 64);
  struct FieldEdaBits {
    FShared r;
    std::vector<BShared> bits;
  };
  // r uniform in [0, 2^m), requires 2^m < p.
  FieldEdaBits edabits_field(std::size_t n, unsigned m);
  struct DaBits {
    BShared b;
    RShared r;
  };
  DaBits dabits(std::size_t n, unsigned k = 64);

  nlohmann::json transcript_json() const;

 private:
  std::vector<std::vector<Fe>> share_field(std::span<const Fe> x, Rng& rng) const;
  std::vector<std::vector<std::uint64_t>> share_ring(std::span<const std::uint64_t> x, unsigned k, Rng& rng) const;
  std::vector<std::vector<std::uint64_t>> share_bits(std::span<const std::uint64_t> words, std::size_t n,
                                                     Rng& rng) const;
  void charge_round(const std::string& label, std::uint64_t bytes_each);
  bool tamper_applies(bool explicit_open);
  void on_detected(std::size_t party);
  void take_triples(std::size_t n);
  std::size_t ring_bytes(unsigned k) const { return (k + 7) / 8; }

  const PrimeField* f_;
  EngineConfig cfg_;
  Stats stats_;
  Rng dealer_;
  Rng owner_rng_;
  Rng coin_rng_;
  std::optional<OpenTamper> tamper_;
  std::uint64_t explicit_opens_ = 0;
  std::optional<std::size_t> coin_fault_;
  std::uint64_t triples_used_ = 0;
  struct RoundRecord {
    std::string label;
    std::vector<std::uint64_t> bytes;
  };
  std::vector<RoundRecord> transcript_;
};

}  // namespace arc::mpc
