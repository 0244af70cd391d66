#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "arc/commit/kzg.hpp"
#include "arc/commit/mimc.hpp"
#include "arc/commit/pedersen.hpp"
#include "arc/commit/signature.hpp"

using namespace arc;

namespace {

const PrimeField& F101() { return PrimeField::small(101); }
const PairingGroup& M101() { return PairingGroup::mock(F101()); }
Fe f(std::uint64_t v) { return Fe::from_u64(F101(), v); }
G1 at(std::uint64_t e) { return G1::from_exponent(M101(), f(e)); }

Polynomial random_poly(const PrimeField& field, Rng& rng, std::size_t len) {
  std::vector<Fe> c;
  for (std::size_t i = 0; i < len; ++i) c.push_back(Fe::random(field, rng));
  return Polynomial(field, c);
}

}  // namespace

TEST(KzgSetup, TrapdoorPowers) {
  KzgParams pp = kzg_setup_with_trapdoor(M101(), f(5), 2);
  ASSERT_EQ(pp.powers.size(), 3u);
  EXPECT_EQ(pp.powers[0], at(1));
  EXPECT_EQ(pp.powers[1], at(5));
  EXPECT_EQ(pp.powers[2], at(25));
  EXPECT_EQ(pp.alpha_h2, M101().g2_generator().mul(f(5)));
}

TEST(KzgSetup, StructureAndDeterminism) {
  const auto& g = PairingGroup::bls12_381();
  KzgParams a = kzg_setup(g, 99, 1), b = kzg_setup(g, 99, 1);
  EXPECT_EQ(a.powers.size(), 2u);
  EXPECT_EQ(a.powers, b.powers);
  EXPECT_EQ(a.alpha_h2, b.alpha_h2);
  EXPECT_NE(kzg_setup(g, 100, 1).powers, a.powers);
  EXPECT_THROW(kzg_setup(g, 1, 0), std::invalid_argument);
  Fe alpha = Fe::from_u64(g.scalar_field(), 1234567);
  EXPECT_EQ(kzg_setup_with_trapdoor(g, alpha, 9).powers, kzg_setup_reference(g, alpha, 9).powers);
}

TEST(KzgCommit, Examples) {
  KzgParams pp = kzg_setup_with_trapdoor(M101(), f(5), 3);
  EXPECT_TRUE(kzg_commit(pp, Polynomial(F101()), f(0)).is_identity());
  Polynomial sq(F101(), {f(0), f(0), f(1)});
  EXPECT_EQ(kzg_commit(pp, sq, f(0)), at(25));
  // randomness lands in the top slot: 25 + 2 * 5^3
  EXPECT_EQ(kzg_commit(pp, sq, f(2)), at((25 + 2 * 125) % 101));
  Polynomial cube(F101(), {f(0), f(0), f(0), f(1)});
  EXPECT_THROW(kzg_commit(pp, cube, f(0)), DegreeOverflow);
}

TEST(KzgCommit, Homomorphism) {
  for (const PairingGroup* g : {&M101(), &PairingGroup::bls12_381()}) {
    KzgParams pp = kzg_setup(*g, 5, 8);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      Polynomial a = random_poly(g->scalar_field(), rng, 8), b = random_poly(g->scalar_field(), rng, 5);
      Fe ra = Fe::random(g->scalar_field(), rng), rb = Fe::random(g->scalar_field(), rng);
      EXPECT_EQ(kzg_commit(pp, a, ra) + kzg_commit(pp, b, rb), kzg_commit(pp, a + b, ra + rb));
    }
  }
}

TEST(KzgProve, Examples) {
  KzgParams pp = kzg_setup_with_trapdoor(M101(), f(5), 3);
  Polynomial sq(F101(), {f(0), f(0), f(1)});
  G1 c = kzg_commit(pp, sq, f(0));
  KzgOpening o = kzg_prove(pp, sq, f(0), f(2), f(4));
  // oracle: q = z + 2 evaluated at alpha = 5
  EXPECT_EQ(o.proof, at(7));
  EXPECT_EQ(o.value, f(4));
  EXPECT_TRUE(kzg_check(pp, c, f(2), o.value, o.proof));
  EXPECT_FALSE(kzg_check(pp, c, f(2), o.value + f(1), o.proof));

  Polynomial constant(F101(), {f(9)});
  Fe r = f(13);
  G1 cc = kzg_commit(pp, constant, r);
  KzgOpening oc = kzg_prove(pp, constant, r, f(40), f(9));
  EXPECT_FALSE(oc.proof.is_identity());
  EXPECT_TRUE(kzg_check(pp, cc, f(40), oc.value, oc.proof));
  EXPECT_THROW(kzg_prove(pp, sq, f(0), f(2), f(5)), NonZeroRemainder);
}

TEST(KzgProve, Completeness) {
  for (const PairingGroup* g : {&M101(), &PairingGroup::bls12_381()}) {
    const auto& fr = g->scalar_field();
    KzgParams pp = kzg_setup(*g, 17, 16);
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      Polynomial p = random_poly(fr, rng, 1 + i % 16);
      Fe r = Fe::random(fr, rng), x = Fe::random(fr, rng);
      G1 c = kzg_commit(pp, p, r);
      KzgOpening o = kzg_prove(pp, p, r, x, p.eval(x));
      ASSERT_TRUE(kzg_check(pp, c, x, o.value, o.proof)) << g->name() << " trial " << i;
    }
  }
}

TEST(KzgProve, EvaluationBindingSmallField) {
  // Opening a commitment to g with the proof of a different g' passes only
  // when g and g' collide at the trapdoor.
  const std::size_t d = 10;
  const int trials = 10000;
  Rng rng(3);
  int accepted = 0;
  for (int t = 0; t < trials; ++t) {
    KzgParams pp = kzg_setup(M101(), rng(), d + 1);
    Polynomial g = random_poly(F101(), rng, d + 1);
    Polynomial h = random_poly(F101(), rng, d + 1);
    if (h == g) h = h + Polynomial(F101(), {f(1)});
    Fe x = Fe::random(F101(), rng);
    G1 c = kzg_commit(pp, g, f(0));
    KzgOpening forged = kzg_prove(pp, h, f(0), x, h.eval(x));
    if (g.eval(x) == h.eval(x)) continue;  // not a forgery
    accepted += kzg_check(pp, c, x, forged.value, forged.proof);
  }
  double q = static_cast<double>(d) / 101.0;
  double bound = q + 3.0 * std::sqrt(q * (1 - q) / trials);
  EXPECT_LE(static_cast<double>(accepted) / trials, bound);
}

TEST(Pedersen, Examples) {
  PedersenParams pp = pedersen_setup(M101(), 4);
  ASSERT_EQ(pp.generators.size(), 5u);
  std::vector<Fe> zero(2, f(0));
  EXPECT_TRUE(pedersen_commit(pp, zero, f(0)).is_identity());
  std::vector<Fe> ones{f(1), f(1)};
  EXPECT_EQ(pedersen_commit(pp, ones, f(0)), at(3 + 4));
  G1 c = pedersen_commit(pp, ones, f(8));
  EXPECT_TRUE(pedersen_verify(pp, c, ones, f(8)));
  std::vector<Fe> flipped{f(1), f(2)};
  EXPECT_FALSE(pedersen_verify(pp, c, flipped, f(8)));
  EXPECT_FALSE(pedersen_verify(pp, c, ones, f(9)));
  std::vector<Fe> too_long(5, f(1));
  EXPECT_THROW(pedersen_commit(pp, too_long, f(0)), DegreeOverflow);
}

TEST(Pedersen, CurveGeneratorsDistinctAndLinear) {
  const auto& g = PairingGroup::bls12_381();
  const auto& fr = g.scalar_field();
  PedersenParams pp = pedersen_setup(g, 6);
  std::set<Bytes> seen;
  for (const auto& h : pp.generators) seen.insert(h.to_bytes());
  EXPECT_EQ(seen.size(), pp.generators.size());
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    std::vector<Fe> m1, m2, mix;
    Fe a = Fe::random(fr, rng), b = Fe::random(fr, rng);
    for (int i = 0; i < 6; ++i) {
      m1.push_back(Fe::random(fr, rng));
      m2.push_back(Fe::random(fr, rng));
      mix.push_back(a * m1.back() + b * m2.back());
    }
    Fe r1 = Fe::random(fr, rng), r2 = Fe::random(fr, rng);
    G1 c1 = pedersen_commit(pp, m1, r1), c2 = pedersen_commit(pp, m2, r2);
    EXPECT_EQ(pedersen_commit(pp, mix, a * r1 + b * r2), c1.mul(a) + c2.mul(b));
  }
}

TEST(HashCommit, Properties) {
  const auto& fr = PrimeField::bls12_381_scalar();
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<Fe> m;
    for (int i = 0; i < t % 5; ++i) m.push_back(Fe::random(fr, rng));
    Fe r = Fe::random(fr, rng);
    EXPECT_EQ(hash_commit(m, r), hash_commit(m, r));
    EXPECT_NE(hash_commit(m, r), hash_commit(m, r + Fe::one(fr)));
  }
  Fe r = Fe::from_u64(fr, 5);
  EXPECT_EQ(hash_commit({}, r), hash_commit({}, r));
  std::vector<Fe> one{Fe::zero(fr)};
  EXPECT_NE(hash_commit({}, r), hash_commit(one, r));
}

TEST(HashCommit, FeistelIsInvertible) {
  // Undo the rounds by hand: (L, R) = (R' , L' - (R' + k)^3).
  const auto& sponge = MimcSponge::for_field(PrimeField::small(1009));
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    Fe l = Fe::random(sponge.field(), rng), r = Fe::random(sponge.field(), rng);
    auto [a, b] = sponge.permute(l, r);
    const auto& k = sponge.round_constants();
    for (std::size_t i = k.size(); i-- > 0;) {
      Fe prev_l = b;
      Fe t3 = (prev_l + k[i]) * (prev_l + k[i]) * (prev_l + k[i]);
      Fe prev_r = a - t3;
      a = prev_l;
      b = prev_r;
    }
    EXPECT_EQ(a, l);
    EXPECT_EQ(b, r);
  }
}

TEST(Signature, SignVerify) {
  KeyPair k = KeyPair::derive(1, "tc0");
  Bytes msg{1, 2, 3, 4};
  Signature s = sign(k, msg);
  EXPECT_TRUE(verify(k.pk, msg, s));
  for (std::size_t i = 0; i < msg.size() * 8; ++i) {
    Bytes m2 = msg;
    m2[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    EXPECT_FALSE(verify(k.pk, m2, s));
  }
  EXPECT_EQ(KeyPair::derive(1, "tc0").pk, k.pk);
  EXPECT_NE(KeyPair::derive(1, "tc1").pk, k.pk);
}

TEST(Signature, DistSign) {
  std::vector<KeyPair> keys;
  std::vector<PublicKey> pks;
  for (int i = 0; i < 3; ++i) {
    keys.push_back(KeyPair::derive(7, "tc" + std::to_string(i)));
    pks.push_back(keys.back().pk);
  }
  Bytes msg{9, 9};
  auto sigs = dist_sign_emulated(keys, msg);
  EXPECT_EQ(sigs.size(), 3u);
  EXPECT_EQ(dist_verify(pks, msg, sigs), std::nullopt);
  sigs[1][0] ^= 1;
  EXPECT_EQ(dist_verify(pks, msg, sigs), 1u);
  sigs.pop_back();
  sigs[1][0] ^= 1;
  EXPECT_EQ(dist_verify(pks, msg, sigs), 2u);
}
