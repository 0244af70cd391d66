#include "arc/mpc/engine.hpp"

#include <algorithm>

namespace arc::mpc {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::SemiHonest:
      return "semi-honest";
    case Mode::WithAbort:
      return "with-abort";
    case Mode::Identifiable:
      return "identifiable";
  }
  return "?";
}

std::uint64_t Stats::max_bytes_per_party() const {
  return bytes_sent.empty() ? 0 : *std::max_element(bytes_sent.begin(), bytes_sent.end());
}

Stats Stats::operator-(const Stats& base) const {
  Stats d = *this;
  d.rounds -= base.rounds;
  d.opened_values -= base.opened_values;
  d.multiplications -= base.multiplications;
  d.and_gates -= base.and_gates;
  d.inputs -= base.inputs;
  d.coins -= base.coins;
  d.external_bytes -= base.external_bytes;
  for (std::size_t i = 0; i < d.bytes_sent.size() && i < base.bytes_sent.size(); ++i) {
    d.bytes_sent[i] -= base.bytes_sent[i];
  }
  return d;
}

Engine::Engine(const PrimeField& f, EngineConfig cfg)
    : f_(&f),
      cfg_(cfg),
      dealer_(derive_seed(cfg.seed, 1)),
      owner_rng_(derive_seed(cfg.seed, 2)),
      coin_rng_(derive_seed(cfg.seed, 3)) {
  if (cfg_.parties < 2) throw std::invalid_argument("need at least two computing parties");
  stats_.bytes_sent.assign(cfg_.parties, 0);
}

std::vector<std::vector<Fe>> Engine::share_field(std::span<const Fe> x, Rng& rng) const {
  std::vector<std::vector<Fe>> s(parties(), std::vector<Fe>(x.size(), Fe::zero(*f_)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    Fe rest = x[i];
    for (std::size_t p = 1; p < parties(); ++p) {
      s[p][i] = Fe::random(*f_, rng);
      rest -= s[p][i];
    }
    s[0][i] = rest;
  }
  return s;
}

std::vector<std::vector<std::uint64_t>> Engine::share_ring(std::span<const std::uint64_t> x, unsigned k,
                                                           Rng& rng) const {
  const std::uint64_t mask = RingElement::mask(k);
  std::vector<std::vector<std::uint64_t>> s(parties(), std::vector<std::uint64_t>(x.size(), 0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t rest = x[i];
    for (std::size_t p = 1; p < parties(); ++p) {
      s[p][i] = rng() & mask;
      rest -= s[p][i];
    }
    s[0][i] = rest & mask;
  }
  return s;
}

std::vector<std::vector<std::uint64_t>> Engine::share_bits(std::span<const std::uint64_t> words, std::size_t n,
                                                           Rng& rng) const {
  const std::size_t nw = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> s(parties(), std::vector<std::uint64_t>(nw, 0));
  for (std::size_t w = 0; w < nw; ++w) {
    std::uint64_t m = word_mask(n, w);
    std::uint64_t rest = words[w] & m;
    for (std::size_t p = 1; p < parties(); ++p) {
      s[p][w] = rng() & m;
      rest ^= s[p][w];
    }
    s[0][w] = rest;
  }
  return s;
}

void Engine::charge_round(const std::string& label, std::uint64_t bytes_each) {
  ++stats_.rounds;
  for (auto& b : stats_.bytes_sent) b += bytes_each;
  if (cfg_.record_transcript) transcript_.push_back({label, std::vector<std::uint64_t>(parties(), bytes_each)});
}

bool Engine::tamper_applies(bool explicit_open) {
  if (!explicit_open) return false;
  std::uint64_t idx = explicit_opens_++;
  if (!tamper_) return false;
  return idx >= tamper_->skip && idx < tamper_->skip + tamper_->count;
}

void Engine::on_detected(std::size_t party) {
  if (cfg_.mode == Mode::WithAbort) throw Abort("opening failed its consistency check");
  if (cfg_.mode == Mode::Identifiable) {
    throw IdentifiedAbort(party, "opening failed its consistency check; party " + std::to_string(party) +
                                     " sent an inconsistent share");
  }
}

void Engine::take_triples(std::size_t n) {
  if (cfg_.triple_budget && triples_used_ + n > *cfg_.triple_budget) throw TripleExhausted();
  triples_used_ += n;
}

// ---- field ----

FShared Engine::input(std::optional<std::size_t> owner, std::span<const Fe> x) {
  FShared r;
  r.f = f_;
  r.s = share_field(x, owner_rng_);
  stats_.inputs += x.size();
  ++stats_.rounds;
  const std::uint64_t bytes = x.size() * f_->byte_size();
  std::vector<std::uint64_t> per(parties(), 0);
  if (owner) {
    if (*owner >= parties()) throw std::out_of_range("input owner");
    per[*owner] = (parties() - 1) * bytes;
    stats_.bytes_sent[*owner] += per[*owner];
  } else {
    stats_.external_bytes += parties() * bytes;
  }
  if (cfg_.record_transcript) transcript_.push_back({"input", per});
  return r;
}

FShared Engine::rand_shared(std::size_t n) {
  std::vector<Fe> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(Fe::random(*f_, dealer_));
  FShared r;
  r.f = f_;
  r.s = share_field(v, dealer_);
  return r;
}

Fe Engine::coin() {
  Fe c = Fe::random(*f_, coin_rng_);
  ++stats_.coins;
  charge_round("coin", (parties() - 1) * f_->byte_size());
  std::vector<Fe> views(parties(), c);
  if (coin_fault_) {
    views.at(*coin_fault_) += Fe::one(*f_);
    coin_fault_.reset();
  }
  for (const auto& v : views) {
    if (v != views[0]) throw CoinDisagreement();
  }
  return c;
}

std::uint64_t Engine::coin_u64() {
  std::uint64_t c = coin_rng_();
  ++stats_.coins;
  charge_round("coin", (parties() - 1) * 8);
  std::vector<std::uint64_t> views(parties(), c);
  if (coin_fault_) {
    views.at(*coin_fault_) ^= 1;
    coin_fault_.reset();
  }
  for (auto v : views) {
    if (v != views[0]) throw CoinDisagreement();
  }
  return c;
}

CheckedOpen Engine::open_checked(const FShared& v, bool explicit_open) {
  if (v.parties() != parties()) throw DomainMismatch("sharing has wrong party count");
  const bool tampered = tamper_applies(explicit_open);
  if (explicit_open) stats_.opened_values += v.size();
  charge_round("open", (parties() - 1) * v.size() * f_->byte_size());
  CheckedOpen out;
  out.values = v.reveal_for_testing();
  if (tampered) {
    if (cfg_.mode == Mode::SemiHonest) {
      for (auto& x : out.values) x += Fe::one(*f_);
    } else if (cfg_.mode == Mode::WithAbort) {
      on_detected(tamper_->party);
    } else {
      out.culprits.push_back(tamper_->party);
    }
  }
  return out;
}

std::vector<Fe> Engine::open(const FShared& v, bool explicit_open) {
  CheckedOpen c = open_checked(v, explicit_open);
  if (!c.culprits.empty()) on_detected(c.culprits.front());
  return c.values;
}

std::vector<Fe> Engine::open_to(const FShared& v, std::size_t recipients) {
  if (recipients == 0) return {};
  if (v.parties() != parties()) throw DomainMismatch("sharing has wrong party count");
  const bool tampered = tamper_applies(true);
  stats_.opened_values += v.size();
  charge_round("open-to", recipients * v.size() * f_->byte_size());
  std::vector<Fe> vals = v.reveal_for_testing();
  if (tampered) {
    if (cfg_.mode == Mode::SemiHonest) {
      for (auto& x : vals) x += Fe::one(*f_);
    } else {
      on_detected(tamper_->party);
    }
  }
  return vals;
}

FShared Engine::mul(const FShared& a, const FShared& b) {
  if (a.size() != b.size() || a.parties() != parties() || b.parties() != parties()) {
    throw DomainMismatch("mul: shape mismatch");
  }
  const std::size_t n = a.size();
  take_triples(n);
  std::vector<Fe> ta(n), tb(n), tc(n);
  for (std::size_t i = 0; i < n; ++i) {
    ta[i] = Fe::random(*f_, dealer_);
    tb[i] = Fe::random(*f_, dealer_);
    tc[i] = ta[i] * tb[i];
  }
  FShared sa{f_, share_field(ta, dealer_)}, sb{f_, share_field(tb, dealer_)}, sc{f_, share_field(tc, dealer_)};
  std::vector<Fe> d = (a - sa).reveal_for_testing();
  std::vector<Fe> e = (b - sb).reveal_for_testing();
  stats_.multiplications += n;
  charge_round("mul", (parties() - 1) * 2 * n * f_->byte_size());
  FShared z = sc;
  for (std::size_t p = 0; p < parties(); ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      z.s[p][i] += d[i] * sb.s[p][i] + e[i] * sa.s[p][i];
      if (p == 0) z.s[p][i] += d[i] * e[i];
    }
  }
  return z;
}

// ---- ring ----

RShared Engine::input_ring(std::optional<std::size_t> owner, std::span<const std::uint64_t> x, unsigned k) {
  RShared r;
  r.k = k;
  r.s = share_ring(x, k, owner_rng_);
  stats_.inputs += x.size();
  ++stats_.rounds;
  const std::uint64_t bytes = x.size() * ring_bytes(k);
  std::vector<std::uint64_t> per(parties(), 0);
  if (owner) {
    if (*owner >= parties()) throw std::out_of_range("input owner");
    per[*owner] = (parties() - 1) * bytes;
    stats_.bytes_sent[*owner] += per[*owner];
  } else {
    stats_.external_bytes += parties() * bytes;
  }
  if (cfg_.record_transcript) transcript_.push_back({"input", per});
  return r;
}

std::vector<std::uint64_t> Engine::open_ring(const RShared& v, bool explicit_open) {
  if (v.parties() != parties()) throw DomainMismatch("sharing has wrong party count");
  const bool tampered = tamper_applies(explicit_open);
  if (explicit_open) stats_.opened_values += v.size();
  charge_round("open", (parties() - 1) * v.size() * ring_bytes(v.k));
  auto vals = v.reveal_for_testing();
  if (tampered) {
    if (cfg_.mode == Mode::SemiHonest) {
      for (auto& x : vals) x = (x + 1) & v.mask();
    } else {
      on_detected(tamper_->party);
    }
  }
  return vals;
}

std::vector<std::uint64_t> Engine::open_ring_to(const RShared& v, std::size_t recipients) {
  if (recipients == 0) return {};
  if (v.parties() != parties()) throw DomainMismatch("sharing has wrong party count");
  const bool tampered = tamper_applies(true);
  stats_.opened_values += v.size();
  charge_round("open-to", recipients * v.size() * ring_bytes(v.k));
  auto vals = v.reveal_for_testing();
  if (tampered) {
    if (cfg_.mode == Mode::SemiHonest) {
      for (auto& x : vals) x = (x + 1) & v.mask();
    } else {
      on_detected(tamper_->party);
    }
  }
  return vals;
}

RShared Engine::mul_ring(const RShared& a, const RShared& b) {
  if (a.size() != b.size() || a.k != b.k || a.parties() != parties() || b.parties() != parties()) {
    throw DomainMismatch("mul_ring: shape mismatch");
  }
  const std::size_t n = a.size();
  const unsigned k = a.k;
  const std::uint64_t mask = a.mask();
  take_triples(n);
  std::vector<std::uint64_t> ta(n), tb(n), tc(n);
  for (std::size_t i = 0; i < n; ++i) {
    ta[i] = dealer_() & mask;
    tb[i] = dealer_() & mask;
    tc[i] = (ta[i] * tb[i]) & mask;
  }
  RShared sa{k, share_ring(ta, k, dealer_)}, sb{k, share_ring(tb, k, dealer_)}, sc{k, share_ring(tc, k, dealer_)};
  auto d = (a - sa).reveal_for_testing();
  auto e = (b - sb).reveal_for_testing();
  stats_.multiplications += n;
  charge_round("mul", (parties() - 1) * 2 * n * ring_bytes(k));
  RShared z = sc;
  for (std::size_t p = 0; p < parties(); ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t v = z.s[p][i] + d[i] * sb.s[p][i] + e[i] * sa.s[p][i];
      if (p == 0) v += d[i] * e[i];
      z.s[p][i] = v & mask;
    }
  }
  return z;
}

// ---- binary ----

BShared Engine::and_bits(const BShared& a, const BShared& b) {
  if (a.n != b.n || a.parties() != parties() || b.parties() != parties()) {
    throw DomainMismatch("and_bits: shape mismatch");
  }
  const std::size_t n = a.n, nw = a.words();
  std::vector<std::uint64_t> ta(nw), tb(nw), tc(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    ta[w] = dealer_() & word_mask(n, w);
    tb[w] = dealer_() & word_mask(n, w);
    tc[w] = ta[w] & tb[w];
  }
  BShared sa{n, share_bits(ta, n, dealer_)}, sb{n, share_bits(tb, n, dealer_)}, sc{n, share_bits(tc, n, dealer_)};
  auto d = (a ^ sa).reveal_for_testing();
  auto e = (b ^ sb).reveal_for_testing();
  stats_.and_gates += n;
  charge_round("and", (parties() - 1) * 2 * ((n + 7) / 8));
  BShared z = sc;
  for (std::size_t p = 0; p < parties(); ++p) {
    for (std::size_t w = 0; w < nw; ++w) {
      z.s[p][w] ^= (d[w] & sb.s[p][w]) ^ (e[w] & sa.s[p][w]);
      if (p == 0) z.s[p][w] ^= d[w] & e[w];
    }
  }
  return z;
}

std::vector<std::uint64_t> Engine::open_bits(const BShared& v, bool explicit_open) {
  if (v.parties() != parties()) throw DomainMismatch("sharing has wrong party count");
  const bool tampered = tamper_applies(explicit_open);
  if (explicit_open) stats_.opened_values += v.n;
  charge_round("open-bits", (parties() - 1) * ((v.n + 7) / 8));
  auto vals = v.reveal_for_testing();
  if (tampered) {
    if (cfg_.mode == Mode::SemiHonest) {
      for (std::size_t w = 0; w < vals.size(); ++w) vals[w] ^= word_mask(v.n, w);
    } else {
      on_detected(tamper_->party);
    }
  }
  return vals;
}

// ---- group ----

CheckedGroupOpen Engine::open_group_checked(const GShared& v) {
  if (v.parties() != parties()) throw DomainMismatch("sharing has wrong party count");
  const bool tampered = tamper_applies(true);
  stats_.opened_values += v.size();
  std::uint64_t width = v.size() ? v.s[0][0].group().g1_bytes() : 0;
  charge_round("open-group", (parties() - 1) * v.size() * width);
  CheckedGroupOpen out;
  out.values = v.reveal_for_testing();
  if (tampered) {
    if (cfg_.mode == Mode::SemiHonest) {
      for (auto& x : out.values) x += x.group().g1_generator();
    } else if (cfg_.mode == Mode::WithAbort) {
      on_detected(tamper_->party);
    } else {
      out.culprits.push_back(tamper_->party);
    }
  }
  return out;
}

std::vector<G1> Engine::open_group(const GShared& v) {
  CheckedGroupOpen c = open_group_checked(v);
  if (!c.culprits.empty()) on_detected(c.culprits.front());
  return c.values;
}

// ---- preprocessing ----

Engine::RingEdaBits Engine::edabits_ring(std::size_t n, unsigned k) {
  const std::uint64_t mask = RingElement::mask(k);
  std::vector<std::uint64_t> r(n);
  for (auto& x : r) x = dealer_() & mask;
  RingEdaBits out;
  out.r = RShared{k, share_ring(r, k, dealer_)};
  const std::size_t nw = (n + 63) / 64;
  for (unsigned j = 0; j < k; ++j) {
    std::vector<std::uint64_t> words(nw, 0);
    for (std::size_t i = 0; i < n; ++i) words[i / 64] |= ((r[i] >> j) & 1) << (i % 64);
    out.bits.push_back(BShared{n, share_bits(words, n, dealer_)});
  }
  return out;
}

Engine::FieldEdaBits Engine::edabits_field(std::size_t n, unsigned m) {
  if (m > 127 || !f_->exceeds_pow2(m)) throw std::invalid_argument("edabits_field: 2^m must be below p");
  using u128 = unsigned __int128;
  std::vector<u128> r(n);
  for (auto& x : r) {
    u128 v = (static_cast<u128>(dealer_()) << 64) | dealer_();
    x = m == 128 ? v : (v & ((static_cast<u128>(1) << m) - 1));
  }
  std::vector<Fe> fr;
  fr.reserve(n);
  for (auto x : r) fr.push_back(Fe::from_u128(*f_, x));
  FieldEdaBits out;
  out.r = FShared{f_, share_field(fr, dealer_)};
  const std::size_t nw = (n + 63) / 64;
  for (unsigned j = 0; j < m; ++j) {
    std::vector<std::uint64_t> words(nw, 0);
    for (std::size_t i = 0; i < n; ++i) {
      words[i / 64] |= static_cast<std::uint64_t>((r[i] >> j) & 1) << (i % 64);
    }
    out.bits.push_back(BShared{n, share_bits(words, n, dealer_)});
  }
  return out;
}

Engine::DaBits Engine::dabits(std::size_t n, unsigned k) {
  const std::size_t nw = (n + 63) / 64;
  std::vector<std::uint64_t> words(nw, 0), vals(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    vals[i] = dealer_() & 1;
    words[i / 64] |= vals[i] << (i % 64);
  }
  DaBits out;
  out.b = BShared{n, share_bits(words, n, dealer_)};
  out.r = RShared{k, share_ring(vals, k, dealer_)};
  return out;
}

nlohmann::json Engine::transcript_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (std::size_t i = 0; i < transcript_.size(); ++i) {
    rounds.push_back({{"round", i}, {"label", transcript_[i].label}, {"bytes", transcript_[i].bytes}});
  }
  return {{"parties", parties()},
          {"field", f_->name()},
          {"mode", to_string(cfg_.mode)},
          {"rounds", rounds},
          {"stats",
           {{"rounds", stats_.rounds},
            {"opened_values", stats_.opened_values},
            {"multiplications", stats_.multiplications},
            {"and_gates", stats_.and_gates},
            {"inputs", stats_.inputs},
            {"coins", stats_.coins},
            {"bytes_sent", stats_.bytes_sent},
            {"external_bytes", stats_.external_bytes}}}};
}

}  // namespace arc::mpc
