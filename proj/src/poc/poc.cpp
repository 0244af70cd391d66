#include "arc/poc/poc.hpp"

#include <stdexcept>

#include "arc/algebra/msm.hpp"
#include "arc/mpc/protocols.hpp"

namespace arc::poc {
namespace {

using mpc::Engine;
using mpc::FShared;

std::vector<Fe> powers_of(const Fe& base, std::size_t first, std::size_t n) {
  std::vector<Fe> out;
  out.reserve(n);
  Fe p = base.pow(first);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(p);
    p *= base;
  }
  return out;
}

bool identifiable(const Engine& e) { return e.mode() == mpc::Mode::Identifiable; }

std::vector<Fe> open_field(Engine& e, const FShared& v, std::vector<std::size_t>& culprits) {
  if (!identifiable(e)) return e.open(v);
  mpc::CheckedOpen c = e.open_checked(v);
  culprits.insert(culprits.end(), c.culprits.begin(), c.culprits.end());
  return c.values;
}

void settle(const Engine& e, CheckTranscript& t, bool prover_ok, const std::vector<std::size_t>& culprits) {
  t.accept = prover_ok && culprits.empty();
  if (!identifiable(e) || t.accept) return;
  if (!prover_ok) {
    t.blame = Blame{Blame::Kind::Prover, 0};
  } else {
    t.blame = Blame{Blame::Kind::ComputingParty, culprits.front()};
  }
}

void check_poly(Engine& e, const PocParams& pp, const PocCommitment& c, const FShared& x, const Witness& w,
                Rng& rng, std::optional<std::size_t> prover_party, CheckTranscript& t) {
  const auto& f = pp.field();
  const std::size_t n = x.size(), m = chunk_count(pp, n);
  if (c.points.size() != m || w.x.size() != n || w.r.size() != m) {
    throw std::invalid_argument("poly check: commitment, witness and shares disagree in size");
  }
  // Step 1: mask commitments; r_w = -r cancels the hiding term of c.
  std::vector<Fe> omega;
  for (std::size_t j = 0; j < m; ++j) {
    omega.push_back(Fe::random(f, rng));
    t.c_omega.push_back(kzg_commit_values(pp.kzg, std::span<const Fe>(&omega.back(), 1), 0, -w.r[j]));
  }
  FShared s_omega = e.input(prover_party, omega);
  // Step 2: the challenge is drawn only after the masks are fixed.
  t.beta = e.coin();
  // Step 3: rho_j = omega_j + sum_i x_{j,i} beta^i, local, then one opening.
  const std::vector<Fe> bpow = powers_of(t.beta, 1, pp.d);
  FShared rho = s_omega;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lo = j * pp.d, len = std::min(pp.d, n - std::min(n, lo));
    if (len == 0) continue;
    FShared part = mpc::inner_public(std::span<const Fe>(bpow).first(len), x.slice(lo, len));
    for (std::size_t p = 0; p < rho.parties(); ++p) rho.s[p][j] += part.s[p][0];
  }
  std::vector<std::size_t> culprits;
  t.rho = open_field(e, rho, culprits);
  // Step 4: the prover opens c + c_w at beta to rho, or to its own value if
  // it cannot.
  std::vector<G1> combined;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lo = j * pp.d, len = std::min(pp.d, n - std::min(n, lo));
    std::vector<Fe> coeffs{omega[j]};
    coeffs.insert(coeffs.end(), w.x.begin() + lo, w.x.begin() + lo + len);
    Polynomial h(f, coeffs);
    KzgOpening o;
    try {
      o = kzg_prove(pp.kzg, h, Fe::zero(f), t.beta, t.rho[j]);
    } catch (const NonZeroRemainder&) {
      o = kzg_prove(pp.kzg, h, Fe::zero(f), t.beta, h.eval(t.beta));
    }
    t.proofs.push_back(o.proof);
    combined.push_back(c.points[j] + t.c_omega[j]);
  }
  // Step 5: verifiers check one pairing equation for all chunks.
  bool ok;
  if (m == 1) {
    ok = kzg_check(pp.kzg, combined[0], t.beta, t.rho[0], t.proofs[0]);
    if (!ok) t.failed_chunks.push_back(0);
  } else {
    BatchResult b = batch_verify(pp.kzg, combined, t.beta, t.rho, t.proofs, e.coin());
    ok = b.accept;
    t.failed_chunks = b.failed;
  }
  settle(e, t, ok, culprits);
}

void check_hash(Engine& e, const PocParams& pp, const PocCommitment& c, const FShared& x, const Witness& w,
                std::optional<std::size_t> prover_party, CheckTranscript& t) {
  if (!c.digest || w.r.size() != 1) throw std::invalid_argument("hash check: malformed commitment or witness");
  FShared r = e.input(prover_party, w.r);
  FShared digest = mpc_hash_commit(e, x, r);
  std::vector<std::size_t> culprits;
  t.opened_digest = open_field(e, digest, culprits)[0];
  settle(e, t, *t.opened_digest == *c.digest, culprits);
}

void check_pedersen(Engine& e, const PocParams& pp, const PocCommitment& c, const FShared& x, const Witness& w,
                    std::optional<std::size_t> prover_party, CheckTranscript& t) {
  const std::size_t n = x.size();
  if (c.points.size() != n || w.r.size() != n) throw std::invalid_argument("pedersen check: size mismatch");
  FShared r = e.input(prover_party, w.r);
  t.beta = e.coin();
  const std::vector<Fe> b = powers_of(t.beta, 0, n);
  FShared xt = n ? mpc::inner_public(b, x) : FShared::zeros(pp.field(), e.parties(), 1);
  FShared rt = n ? mpc::inner_public(b, r) : FShared::zeros(pp.field(), e.parties(), 1);
  mpc::GShared cs = mpc::dist_commit_pedersen(pp.ped, xt, rt);
  std::vector<std::size_t> culprits;
  if (identifiable(e)) {
    mpc::CheckedGroupOpen o = e.open_group_checked(cs);
    t.opened_commitment = o.values[0];
    culprits = o.culprits;
  } else {
    t.opened_commitment = e.open_group(cs)[0];
  }
  G1 folded = msm(*pp.group, b, c.points);
  settle(e, t, folded == *t.opened_commitment, culprits);
}

}  // namespace

const char* to_string(Backend b) {
  switch (b) {
    case Backend::Poly: return "poly";
    case Backend::Hash: return "hash";
    case Backend::Pedersen: return "pedersen";
  }
  return "?";
}

Backend backend_from_string(std::string_view s) {
  if (s == "poly") return Backend::Poly;
  if (s == "hash") return Backend::Hash;
  if (s == "pedersen") return Backend::Pedersen;
  throw std::invalid_argument("unknown consistency-check backend: " + std::string(s));
}

PocParams poc_setup(Backend b, const PairingGroup& g, std::uint64_t seed, std::size_t d) {
  if (d == 0) throw std::invalid_argument("poc_setup: d must be at least 1");
  PocParams pp;
  pp.backend = b;
  pp.group = &g;
  pp.d = d;
  if (b == Backend::Poly) pp.kzg = kzg_setup(g, seed, d + 1);
  // Each element is committed on its own, so h0 and h1 suffice for any d.
  if (b == Backend::Pedersen) pp.ped = pedersen_setup(g, 1);
  return pp;
}

std::size_t chunk_count(const PocParams& pp, std::size_t n) { return n == 0 ? 1 : (n + pp.d - 1) / pp.d; }

std::size_t randomness_size(const PocParams& pp, std::size_t n) {
  switch (pp.backend) {
    case Backend::Poly: return chunk_count(pp, n);
    case Backend::Hash: return 1;
    case Backend::Pedersen: return n;
  }
  return 0;
}

std::vector<Fe> sample_randomness(const PocParams& pp, std::size_t n, Rng& rng) {
  std::vector<Fe> r;
  for (std::size_t i = 0, k = randomness_size(pp, n); i < k; ++i) r.push_back(Fe::random(pp.field(), rng));
  return r;
}

PocCommitment poc_commit(const PocParams& pp, std::span<const Fe> x, std::span<const Fe> r) {
  if (r.size() != randomness_size(pp, x.size())) throw std::invalid_argument("poc_commit: randomness count");
  PocCommitment c;
  c.backend = pp.backend;
  switch (pp.backend) {
    case Backend::Poly:
      for (std::size_t j = 0, m = chunk_count(pp, x.size()); j < m; ++j) {
        const std::size_t lo = j * pp.d, len = std::min(pp.d, x.size() - std::min(x.size(), lo));
        c.points.push_back(kzg_commit_values(pp.kzg, x.subspan(lo, len), 1, r[j]));
      }
      break;
    case Backend::Hash:
      c.digest = hash_commit(x, r[0]);
      break;
    case Backend::Pedersen:
      c.points = two_base_each(x, pp.ped.generators[1], r, pp.ped.blinding());
      break;
  }
  return c;
}

PocCommitment poc_commit_shared(Engine& e, const PocParams& pp, const FShared& x, const FShared& r) {
  if (r.size() != randomness_size(pp, x.size())) throw std::invalid_argument("poc_commit_shared: randomness count");
  PocCommitment c;
  c.backend = pp.backend;
  switch (pp.backend) {
    case Backend::Poly:
      for (std::size_t j = 0, m = chunk_count(pp, x.size()); j < m; ++j) {
        const std::size_t lo = j * pp.d, len = std::min(pp.d, x.size() - std::min(x.size(), lo));
        mpc::GShared g = mpc::dist_commit_kzg(pp.kzg, x.slice(lo, len), 1, r.element(j));
        c.points.push_back(e.open_group(g)[0]);
      }
      break;
    case Backend::Hash:
      c.digest = e.open(mpc_hash_commit(e, x, r))[0];
      break;
    case Backend::Pedersen: {
      mpc::GShared g;
      for (std::size_t p = 0; p < x.parties(); ++p) {
        g.s.push_back(two_base_each(x.s[p], pp.ped.generators[1], r.s[p], pp.ped.blinding()));
      }
      c.points = e.open_group(g);
      break;
    }
  }
  return c;
}

void PocCommitment::write(ByteWriter& w) const {
  w.u8(static_cast<std::uint8_t>(backend));
  if (backend == Backend::Hash) {
    digest->write(w);
    return;
  }
  w.u32(static_cast<std::uint32_t>(points.size()));
  for (const auto& p : points) w.raw(p.to_bytes());
}

Bytes PocCommitment::to_bytes() const {
  ByteWriter w;
  write(w);
  return std::move(w).take();
}

PocCommitment PocCommitment::read(const PairingGroup& g, ByteReader& r) {
  PocCommitment c;
  std::uint8_t tag = r.u8();
  if (tag > 2) throw ParseError("unknown commitment backend tag");
  c.backend = static_cast<Backend>(tag);
  if (c.backend == Backend::Hash) {
    c.digest = Fe::read(g.scalar_field(), r);
    return c;
  }
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) c.points.push_back(G1::from_bytes(g, r.raw(g.g1_bytes())));
  return c;
}

CheckTranscript poc_check(Engine& e, const PocParams& pp, const PocCommitment& c, const FShared& x, const Witness& w,
                          Rng& prover_rng, std::optional<std::size_t> prover_party) {
  if (c.backend != pp.backend) throw std::invalid_argument("poc_check: commitment backend mismatch");
  if (&e.field() != &pp.field() || (x.size() && x.f != &pp.field())) {
    throw ModulusMismatch();
  }
  CheckTranscript t;
  t.backend = pp.backend;
  const mpc::Stats before = e.stats();
  switch (pp.backend) {
    case Backend::Poly: check_poly(e, pp, c, x, w, prover_rng, prover_party, t); break;
    case Backend::Hash: check_hash(e, pp, c, x, w, prover_party, t); break;
    case Backend::Pedersen: check_pedersen(e, pp, c, x, w, prover_party, t); break;
  }
  t.cost = e.stats() - before;
  return t;
}

BatchResult batch_verify(const KzgParams& pp, std::span<const G1> cs, const Fe& beta, std::span<const Fe> rhos,
                         std::span<const G1> proofs, const Fe& gamma) {
  const std::size_t n = cs.size();
  if (rhos.size() != n || proofs.size() != n) throw std::invalid_argument("batch_verify: length mismatch");
  BatchResult out;
  if (n == 0) {
    out.accept = out.batch_passed = true;
    return out;
  }
  const std::vector<Fe> g = powers_of(gamma, 1, n);
  G1 c = msm(*pp.group, g, cs);
  G1 pi = msm(*pp.group, g, proofs);
  Fe rho = Fe::zero(beta.field());
  for (std::size_t i = 0; i < n; ++i) rho += g[i] * rhos[i];
  out.batch_passed = kzg_check(pp, c, beta, rho, pi);
  if (!out.batch_passed) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!kzg_check(pp, cs[i], beta, rhos[i], proofs[i])) out.failed.push_back(i);
    }
  }
  out.accept = out.failed.empty();
  return out;
}

FShared mpc_hash_commit(Engine& e, const FShared& x, const FShared& r) {
  const MimcSponge& sponge = MimcSponge::for_field(e.field());
  const auto& f = e.field();
  std::vector<Fe> cap0{Fe::from_u64(f, x.size())};
  FShared rate = FShared::zeros(f, e.parties(), 1);
  FShared cap = FShared::constant(f, e.parties(), cap0);
  auto absorb = [&](const FShared& v) {
    FShared l = rate + v, rr = cap;
    for (const Fe& k : sponge.round_constants()) {
      FShared tk = l.add_public(std::span<const Fe>(&k, 1));
      FShared cube = e.mul(e.mul(tk, tk), tk);
      FShared next = rr + cube;
      rr = std::move(l);
      l = std::move(next);
    }
    rate = std::move(l);
    cap = std::move(rr);
  };
  for (std::size_t i = 0; i < x.size(); ++i) absorb(x.element(i));
  absorb(r);
  return rate;
}

nlohmann::json CheckTranscript::to_json() const {
  auto pts = [](const std::vector<G1>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back(to_hex(p.to_bytes()));
    return a;
  };
  nlohmann::json j;
  j["backend"] = to_string(backend);
  if (beta.attached()) j["beta"] = beta.to_string();
  nlohmann::json rh = nlohmann::json::array();
  for (const auto& x : rho) rh.push_back(x.to_string());
  j["rho"] = rh;
  j["c_omega"] = pts(c_omega);
  j["proofs"] = pts(proofs);
  if (opened_commitment) j["opened_commitment"] = to_hex(opened_commitment->to_bytes());
  if (opened_digest) j["opened_digest"] = opened_digest->to_string();
  j["failed_chunks"] = failed_chunks;
  j["accept"] = accept;
  if (blame) {
    j["blame"] = {{"kind", blame->kind == Blame::Kind::Prover ? "prover" : "computing-party"},
                  {"party", blame->party}};
  }
  j["cost"] = {{"rounds", cost.rounds},
               {"opened_values", cost.opened_values},
               {"multiplications", cost.multiplications},
               {"inputs", cost.inputs},
               {"coins", cost.coins},
               {"max_bytes_per_party", cost.max_bytes_per_party()}};
  return j;
}

}  // namespace arc::poc
