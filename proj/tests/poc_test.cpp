#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "arc/poc/poc.hpp"

using namespace arc;
using namespace arc::poc;
using mpc::Engine;
using mpc::EngineConfig;
using mpc::FShared;
using mpc::Mode;

namespace {

const PairingGroup& mock101() { return PairingGroup::mock(PrimeField::small(101)); }
const PairingGroup& mock_big() { return PairingGroup::mock(PrimeField::small((1ULL << 61) - 1)); }

std::vector<Fe> random_fes(const PrimeField& f, std::size_t n, Rng& rng) {
  std::vector<Fe> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Fe::random(f, rng));
  return out;
}

struct Instance {
  Witness w;
  PocCommitment c;
};

Instance make_instance(const PocParams& pp, std::size_t n, Rng& rng) {
  Instance in;
  in.w.x = random_fes(pp.field(), n, rng);
  in.w.r = sample_randomness(pp, n, rng);
  in.c = poc_commit(pp, in.w.x, in.w.r);
  return in;
}

EngineConfig cfg(std::uint64_t seed, Mode mode = Mode::SemiHonest) {
  EngineConfig c;
  c.seed = seed;
  c.mode = mode;
  return c;
}

}  // namespace

TEST(PocSetup, Structure) {
  const auto& g = mock_big();
  // Degree 0 is unused and the top slot holds the hiding term.
  EXPECT_EQ(poc_setup(Backend::Poly, g, 1, 4).kzg.powers.size(), 6u);
  EXPECT_EQ(poc_setup(Backend::Pedersen, g, 1, 4).ped.generators.size(), 2u);
  auto a = poc_setup(Backend::Poly, PairingGroup::bls12_381(), 9, 3);
  auto b = poc_setup(Backend::Poly, PairingGroup::bls12_381(), 9, 3);
  EXPECT_EQ(a.kzg.powers, b.kzg.powers);
  EXPECT_THROW(poc_setup(Backend::Poly, g, 1, 0), std::invalid_argument);
}

TEST(PocCommit, PolyExampleAtSmallPrime) {
  const auto& g = mock101();
  const auto& f = g.scalar_field();
  PocParams pp = poc_setup(Backend::Poly, g, 1, 4);
  pp.kzg = kzg_setup_with_trapdoor(g, Fe::from_u64(f, 5), 5);
  std::vector<Fe> x{Fe::from_u64(f, 1), Fe::from_u64(f, 2)}, r{Fe::zero(f)};
  // g(z) = z + 2 z^2, g(5) = 55.
  PocCommitment c = poc_commit(pp, x, r);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0], Fe::from_u64(f, 55) * g.g1_generator());

  std::vector<Fe> zero(3, Fe::zero(f)), r7{Fe::from_u64(f, 7)};
  // Zero vector: only the hiding term r * alpha^5 remains.
  EXPECT_EQ(poc_commit(pp, zero, r7).points[0], (Fe::from_u64(f, 7) * Fe::from_u64(f, 5).pow(5)) * g.g1_generator());
}

TEST(PocCommit, PedersenPerElement) {
  const auto& g = PairingGroup::bls12_381();
  const auto& f = g.scalar_field();
  PocParams pp = poc_setup(Backend::Pedersen, g, 1, 4);
  Rng rng(3);
  auto x = random_fes(f, 3, rng), r = random_fes(f, 3, rng);
  PocCommitment c = poc_commit(pp, x, r);
  ASSERT_EQ(c.points.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c.points[i], pedersen_commit(pp.ped, std::span<const Fe>(&x[i], 1), r[i]));
  }
}

TEST(PocCommit, HashMatchesSpongeAndEmptyInput) {
  const auto& g = mock_big();
  PocParams pp = poc_setup(Backend::Hash, g, 1, 4);
  Rng rng(4);
  auto r = random_fes(g.scalar_field(), 1, rng);
  std::vector<Fe> none;
  EXPECT_EQ(*poc_commit(pp, none, r).digest, hash_commit(none, r[0]));
}

TEST(PocCommit, SerializationRoundTripAndSize) {
  for (auto b : {Backend::Poly, Backend::Hash, Backend::Pedersen}) {
    const auto& g = PairingGroup::bls12_381();
    PocParams pp = poc_setup(b, g, 2, 8);
    Rng rng(5);
    Instance in = make_instance(pp, 5, rng);
    Bytes bytes = in.c.to_bytes();
    ByteReader r(bytes);
    EXPECT_EQ(PocCommitment::read(g, r), in.c);
    EXPECT_TRUE(r.done());
  }
}

class PocBackends : public ::testing::TestWithParam<std::tuple<Backend, bool>> {
 protected:
  Backend backend() const { return std::get<0>(GetParam()); }
  const PairingGroup& group() const { return std::get<1>(GetParam()) ? PairingGroup::bls12_381() : mock_big(); }
};

TEST_P(PocBackends, HonestAccepts) {
  const auto& g = group();
  for (std::size_t d : {1u, 5u, 16u}) {
    PocParams pp = poc_setup(backend(), g, d, d);
    for (std::size_t n : {std::size_t{0}, d, d + 1, 3 * d}) {
      Rng rng(d * 100 + n);
      Instance in = make_instance(pp, n, rng);
      Engine e(pp.field(), cfg(n));
      FShared x = e.input(std::nullopt, in.w.x);
      CheckTranscript t = poc_check(e, pp, in.c, x, in.w, rng);
      EXPECT_TRUE(t.accept) << "d=" << d << " n=" << n;
      EXPECT_FALSE(t.blame);
    }
  }
}

TEST_P(PocBackends, TamperMatrix) {
  const auto& g = group();
  const int seeds = std::get<1>(GetParam()) ? 10 : 100;
  PocParams pp = poc_setup(backend(), g, 7, 6);
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(seed);
    Instance in = make_instance(pp, 6, rng);
    // honest
    {
      Engine e(pp.field(), cfg(seed));
      FShared x = e.input(std::nullopt, in.w.x);
      EXPECT_TRUE(poc_check(e, pp, in.c, x, in.w, rng).accept);
    }
    // one share of one element tampered
    {
      Engine e(pp.field(), cfg(seed));
      FShared x = e.input(std::nullopt, in.w.x);
      x.s[1][seed % 6] += Fe::one(pp.field());
      EXPECT_FALSE(poc_check(e, pp, in.c, x, in.w, rng).accept) << "seed " << seed;
    }
    // commitment to a different vector, prover keeps the committed witness
    {
      Instance other = make_instance(pp, 6, rng);
      Engine e(pp.field(), cfg(seed));
      FShared x = e.input(std::nullopt, in.w.x);
      EXPECT_FALSE(poc_check(e, pp, other.c, x, other.w, rng).accept) << "seed " << seed;
    }
  }
}

TEST_P(PocBackends, IdentifiableBlame) {
  const auto& g = group();
  PocParams pp = poc_setup(backend(), g, 3, 4);
  Rng rng(17);
  Instance in = make_instance(pp, 4, rng), other = make_instance(pp, 4, rng);
  auto run = [&](const Instance& claim, std::optional<std::size_t> tamper) {
    Engine e(pp.field(), cfg(1, Mode::Identifiable));
    FShared x = e.input(std::nullopt, in.w.x);
    if (tamper) e.set_open_tamper(mpc::OpenTamper{.party = *tamper});
    return poc_check(e, pp, claim.c, x, claim.w, rng);
  };
  CheckTranscript honest = run(in, std::nullopt);
  EXPECT_TRUE(honest.accept);
  EXPECT_FALSE(honest.blame);

  CheckTranscript bad_prover = run(other, std::nullopt);
  EXPECT_FALSE(bad_prover.accept);
  EXPECT_EQ(bad_prover.blame, (Blame{Blame::Kind::Prover, 0}));

  CheckTranscript bad_party = run(in, 2);
  EXPECT_FALSE(bad_party.accept);
  EXPECT_EQ(bad_party.blame, (Blame{Blame::Kind::ComputingParty, 2}));

  // Both faults at once: the prover is blamed first.
  CheckTranscript both = run(other, 1);
  EXPECT_EQ(both.blame, (Blame{Blame::Kind::Prover, 0}));
}

TEST_P(PocBackends, WithAbortRaisesOnTamperedOpening) {
  PocParams pp = poc_setup(backend(), group(), 3, 4);
  Rng rng(18);
  Instance in = make_instance(pp, 4, rng);
  Engine e(pp.field(), cfg(1, Mode::WithAbort));
  FShared x = e.input(std::nullopt, in.w.x);
  e.set_open_tamper(mpc::OpenTamper{.party = 0});
  EXPECT_THROW(poc_check(e, pp, in.c, x, in.w, rng), mpc::Abort);
}

INSTANTIATE_TEST_SUITE_P(All, PocBackends,
                         ::testing::Combine(::testing::Values(Backend::Poly, Backend::Hash, Backend::Pedersen),
                                            ::testing::Bool()),
                         [](const auto& info) {
                           return std::string(to_string(std::get<0>(info.param))) +
                                  (std::get<1>(info.param) ? "_Bls12381" : "_Mock");
                         });

TEST(PocPoly, ForgedCommitmentAcceptanceWithinSchwartzZippelBound) {
  const auto& g = mock101();
  const std::size_t d = 10;
  const int trials = 10000;
  PocParams pp = poc_setup(Backend::Poly, g, 1, d);
  Engine e(pp.field(), cfg(2));
  Rng rng(2);
  int accepted = 0;
  for (int t = 0; t < trials; ++t) {
    Instance honest = make_instance(pp, d, rng), forged = make_instance(pp, d, rng);
    if (forged.w.x == honest.w.x) continue;
    FShared x = e.input(std::nullopt, honest.w.x);
    accepted += poc_check(e, pp, forged.c, x, forged.w, rng).accept;
  }
  const double bound = static_cast<double>(d) / 101;
  const double sigma = std::sqrt(bound * (1 - bound) / trials);
  EXPECT_LE(static_cast<double>(accepted) / trials, bound + 3 * sigma);
  // beta = 0 is always a common root, so some forgeries must get through.
  EXPECT_GT(accepted, 0);
}

TEST(PocPoly, OpenedRhoIsUniform) {
  const auto& g = mock101();
  PocParams pp = poc_setup(Backend::Poly, g, 1, 4);
  Rng rng(8);
  Instance in = make_instance(pp, 4, rng);
  Engine e(pp.field(), cfg(3));
  FShared x = e.input(std::nullopt, in.w.x);
  std::vector<double> counts(101, 0);
  const int runs = 10000;
  for (int i = 0; i < runs; ++i) {
    CheckTranscript t = poc_check(e, pp, in.c, x, in.w, rng);
    ASSERT_TRUE(t.accept);
    counts[t.rho[0].low_u64()] += 1;
  }
  const double expected = runs / 101.0;
  double stat = 0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  EXPECT_LT(stat, boost::math::quantile(boost::math::chi_squared(100), 0.99));
}

TEST(PocCost, TableShape) {
  const auto& g = mock_big();
  for (std::size_t d : {4u, 64u, 256u}) {
    Rng rng(d);
    for (auto b : {Backend::Poly, Backend::Hash, Backend::Pedersen}) {
      PocParams pp = poc_setup(b, g, 1, d);
      Instance in = make_instance(pp, d, rng);
      Engine e(pp.field(), cfg(1));
      FShared x = e.input(std::nullopt, in.w.x);
      CheckTranscript t = poc_check(e, pp, in.c, x, in.w, rng);
      ASSERT_TRUE(t.accept);
      switch (b) {
        case Backend::Poly:
          EXPECT_EQ(t.cost.opened_values, 1u);
          EXPECT_EQ(t.cost.multiplications, 0u);
          EXPECT_EQ(t.cost.inputs, 1u);
          EXPECT_EQ(t.cost.coins, 1u);
          EXPECT_EQ(t.cost.rounds, 3u);  // input, coin, open
          EXPECT_EQ(in.c.points.size(), 1u);
          break;
        case Backend::Hash:
          EXPECT_EQ(t.cost.opened_values, 1u);
          EXPECT_EQ(t.cost.multiplications, 2 * MimcSponge::kRounds * (d + 1));
          break;
        case Backend::Pedersen:
          EXPECT_EQ(t.cost.opened_values, 1u);
          EXPECT_EQ(t.cost.multiplications, 0u);
          EXPECT_EQ(in.c.points.size(), d);
          break;
      }
    }
  }
}

TEST(PocPoly, ChunkedCheckUsesOneOpeningPerChunk) {
  const auto& g = mock_big();
  PocParams pp = poc_setup(Backend::Poly, g, 1, 8);
  Rng rng(9);
  Instance in = make_instance(pp, 20, rng);
  ASSERT_EQ(in.c.points.size(), 3u);
  Engine e(pp.field(), cfg(4));
  FShared x = e.input(std::nullopt, in.w.x);
  CheckTranscript t = poc_check(e, pp, in.c, x, in.w, rng);
  EXPECT_TRUE(t.accept);
  EXPECT_EQ(t.cost.opened_values, 3u);

  // A tampered element in the last chunk is isolated by the fallback.
  FShared bad = x;
  bad.s[0][17] += Fe::one(pp.field());
  CheckTranscript r = poc_check(e, pp, in.c, bad, in.w, rng);
  EXPECT_FALSE(r.accept);
  EXPECT_EQ(r.failed_chunks, std::vector<std::size_t>{2});
}

TEST(PocPedersen, ReplacedCommitmentRejectedAtSmallPrime) {
  const auto& g = mock101();
  const std::size_t d = 5;
  PocParams pp = poc_setup(Backend::Pedersen, g, 1, d);
  Rng rng(10);
  Engine e(pp.field(), cfg(5));
  int rejected = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    Instance in = make_instance(pp, d, rng);
    PocCommitment c = in.c;
    std::size_t k = uniform_below(rng, d);
    c.points[k] += g.g1_generator();
    FShared x = e.input(std::nullopt, in.w.x);
    rejected += !poc_check(e, pp, c, x, in.w, rng).accept;
  }
  // A single replaced c_k survives only when beta^k vanishes, i.e. beta = 0
  // for k > 0, which is well within (d - 1) / p.
  EXPECT_GE(static_cast<double>(rejected) / trials, 1.0 - (d - 1) / 101.0);
}

TEST(PocPedersen, SingleElementMatchesVerify) {
  const auto& g = PairingGroup::bls12_381();
  PocParams pp = poc_setup(Backend::Pedersen, g, 1, 1);
  Rng rng(11);
  Instance in = make_instance(pp, 1, rng);
  Engine e(pp.field(), cfg(6));
  FShared x = e.input(std::nullopt, in.w.x);
  CheckTranscript t = poc_check(e, pp, in.c, x, in.w, rng);
  EXPECT_TRUE(t.accept);
  // With one element the opened c' is the commitment itself (beta^0 = 1).
  EXPECT_TRUE(pedersen_verify(pp.ped, *t.opened_commitment, in.w.x, in.w.r[0]));
}

TEST(PocHash, MpcEvaluationMatchesPlaintext) {
  const auto& f = PrimeField::small((1ULL << 61) - 1);
  Rng rng(12);
  for (std::size_t n : {0u, 1u, 3u}) {
    auto m = random_fes(f, n, rng), r = random_fes(f, 1, rng);
    Engine e(f, cfg(n));
    FShared d = mpc_hash_commit(e, e.input(0, m), e.input(1, r));
    EXPECT_EQ(e.open(d)[0], hash_commit(m, r[0]));
  }
}

TEST(PocTranscript, JsonCarriesVerdictAndCost) {
  const auto& g = mock_big();
  PocParams pp = poc_setup(Backend::Poly, g, 1, 4);
  Rng rng(13);
  Instance in = make_instance(pp, 4, rng);
  Engine e(pp.field(), cfg(7, Mode::Identifiable));
  FShared x = e.input(std::nullopt, in.w.x);
  e.set_open_tamper(mpc::OpenTamper{.party = 1});
  auto j = poc_check(e, pp, in.c, x, in.w, rng).to_json();
  EXPECT_EQ(j["backend"], "poly");
  EXPECT_EQ(j["accept"], false);
  EXPECT_EQ(j["blame"]["kind"], "computing-party");
  EXPECT_EQ(j["blame"]["party"], 1);
  EXPECT_EQ(j["cost"]["opened_values"], 1);
}

// ---- batch verification ----

namespace {

struct Openings {
  std::vector<G1> cs, proofs;
  std::vector<Fe> rhos;
};

Openings honest_openings(const KzgParams& pp, std::size_t n, const Fe& beta, Rng& rng) {
  const auto& f = beta.field();
  Openings o;
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial g(f, random_fes(f, pp.max_degree(), rng));
    Fe r = Fe::random(f, rng);
    o.cs.push_back(kzg_commit(pp, g, r));
    KzgOpening op = kzg_prove(pp, g, r, beta, g.eval(beta));
    o.proofs.push_back(op.proof);
    o.rhos.push_back(op.value);
  }
  return o;
}

}  // namespace

TEST(Batch, HonestUsesOnePairingAndForgeryIsIsolated) {
  for (bool bls : {false, true}) {
    const auto& g = bls ? PairingGroup::bls12_381() : mock_big();
    const auto& f = g.scalar_field();
    KzgParams pp = kzg_setup(g, 1, 8);
    const int seeds = bls ? 10 : 100;
    for (int seed = 0; seed < seeds; ++seed) {
      Rng rng(seed);
      Fe beta = Fe::random(f, rng), gamma = Fe::random(f, rng);
      Openings o = honest_openings(pp, 5, beta, rng);
      g.reset_pairing_checks();
      BatchResult ok = batch_verify(pp, o.cs, beta, o.rhos, o.proofs, gamma);
      EXPECT_TRUE(ok.accept);
      EXPECT_TRUE(ok.batch_passed);
      EXPECT_EQ(g.pairing_checks(), 1u);

      std::size_t k = uniform_below(rng, 5);
      o.proofs[k] += g.g1_generator();
      BatchResult bad = batch_verify(pp, o.cs, beta, o.rhos, o.proofs, gamma);
      EXPECT_FALSE(bad.accept);
      EXPECT_EQ(bad.failed, std::vector<std::size_t>{k});
    }
  }
}

TEST(Batch, SingleOpeningEqualsKzgCheck) {
  const auto& g = mock_big();
  KzgParams pp = kzg_setup(g, 2, 6);
  Rng rng(1);
  Fe beta = Fe::random(g.scalar_field(), rng);
  Openings o = honest_openings(pp, 1, beta, rng);
  for (int flip = 0; flip < 2; ++flip) {
    if (flip) o.rhos[0] += Fe::one(g.scalar_field());
    bool direct = kzg_check(pp, o.cs[0], beta, o.rhos[0], o.proofs[0]);
    EXPECT_EQ(batch_verify(pp, o.cs, beta, o.rhos, o.proofs, Fe::random(g.scalar_field(), rng)).accept, direct);
  }
}

TEST(Batch, AggregateAgreesWithIndividualChecksUpToNOverP) {
  const auto& g = mock101();
  const auto& f = g.scalar_field();
  KzgParams pp = kzg_setup(g, 3, 4);
  Rng rng(21);
  const std::size_t n = 4;
  const int trials = 5000;
  int disagree = 0;
  for (int t = 0; t < trials; ++t) {
    Fe beta = Fe::random(f, rng);
    Openings o = honest_openings(pp, n, beta, rng);
    // Corrupt a random subset of claimed values.
    for (std::size_t i = 0; i < n; ++i) {
      if (uniform_below(rng, 3) == 0) o.rhos[i] += Fe::random(f, rng);
    }
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) all &= kzg_check(pp, o.cs[i], beta, o.rhos[i], o.proofs[i]);
    BatchResult b = batch_verify(pp, o.cs, beta, o.rhos, o.proofs, Fe::random(f, rng));
    // Once the aggregate fails, the fallback makes the verdict exact.
    if (!b.batch_passed) {
      EXPECT_EQ(b.accept, all);
    }
    disagree += b.accept != all;
  }
  const double bound = static_cast<double>(n) / 101;
  const double sigma = std::sqrt(bound * (1 - bound) / trials);
  EXPECT_LE(static_cast<double>(disagree) / trials, bound + 3 * sigma);
}
