#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "arc/algebra/field.hpp"
#include "arc/algebra/group.hpp"
#include "arc/algebra/msm.hpp"
#include "arc/algebra/polynomial.hpp"
#include "arc/algebra/ring.hpp"

using namespace arc;
using boost::multiprecision::cpp_int;

namespace {

const PrimeField& F101() { return PrimeField::small(101); }

Fe f(std::uint64_t v, const PrimeField& field = F101()) { return Fe::from_u64(field, v); }

cpp_int to_big(const Fe& x) {
  cpp_int r = 0;
  auto l = x.limbs();
  for (int i = 3; i >= 0; --i) r = (r << 64) | l[i];
  return r;
}

cpp_int bls_r() {
  return cpp_int("0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001");
}

Polynomial random_poly(const PrimeField& field, Rng& rng, std::size_t len) {
  std::vector<Fe> c;
  for (std::size_t i = 0; i < len; ++i) c.push_back(Fe::random(field, rng));
  return Polynomial(field, c);
}

}  // namespace

TEST(Field, SmallPrimeExamples) {
  EXPECT_EQ(f(50) + f(60), f(9));
  // oracle: brute-force search for the inverse
  std::uint64_t inv2 = 0;
  for (std::uint64_t c = 1; c < 101; ++c) {
    if (2 * c % 101 == 1) inv2 = c;
  }
  EXPECT_EQ(inv2, 51u);
  EXPECT_EQ(f(2).inv(), f(inv2));
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    Fe a = Fe::random(F101(), rng);
    EXPECT_EQ(a * Fe::one(F101()), a);
  }
}

TEST(Field, Errors) {
  EXPECT_THROW(Fe::zero(F101()).inv(), DivisionByZero);
  EXPECT_THROW(f(1) + f(1, PrimeField::small(1009)), ModulusMismatch);
  EXPECT_THROW(PrimeField::small(100), std::invalid_argument);
}

TEST(Field, AxiomsAgainstBigIntegerOracle) {
  const auto& fr = PrimeField::bls12_381_scalar();
  cpp_int r = bls_r();
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Fe a = Fe::random(fr, rng), b = Fe::random(fr, rng);
    cpp_int A = to_big(a), B = to_big(b);
    ASSERT_LT(A, r);
    EXPECT_EQ(to_big(a + b), (A + B) % r);
    EXPECT_EQ(to_big(a - b), ((A - B) % r + r) % r);
    EXPECT_EQ(to_big(a * b), (A * B) % r);
    if (!b.is_zero()) {
      EXPECT_EQ(to_big(b * b.inv()), 1);
    }
    EXPECT_EQ(to_big(a.pow(5)), (A * A * A * A * A) % r);
  }
  EXPECT_EQ(to_big(Fe::from_i64(fr, -3)), r - 3);
  EXPECT_EQ(Fe::from_i64(fr, -3).to_i64_centered(), -3);
  EXPECT_EQ(Fe::from_i64(F101(), -3), f(98));
}

TEST(Field, Serialization) {
  for (const PrimeField* field : {&F101(), &PrimeField::bls12_381_scalar()}) {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      Fe a = Fe::random(*field, rng);
      ByteWriter w;
      a.write(w);
      ByteReader r(w.bytes());
      EXPECT_EQ(Fe::read(*field, r), a);
      EXPECT_TRUE(r.done());
    }
  }
  Bytes over{0xff};
  EXPECT_THROW(Fe::from_bytes(F101(), over), ParseError);
  EXPECT_EQ(f(77).to_string(), "77");
}

TEST(Ring, WrapsAndRoundTrips) {
  RingElement a(UINT64_MAX), b(2);
  EXPECT_EQ((a + b).value(), 1u);
  RingElement c(250, 8), d(10, 8);
  EXPECT_EQ((c + d).value(), 4u);
  EXPECT_EQ(RingElement::from_signed(-3, 8).value(), 253u);
  EXPECT_EQ(RingElement(253, 8).to_signed(), -3);
  ByteWriter w;
  c.write(w);
  ByteReader r(w.bytes());
  EXPECT_EQ(RingElement::read(r), c);
}

TEST(Polynomial, Examples) {
  Polynomial zero(F101());
  EXPECT_EQ(zero.eval(f(17)), f(0));
  Polynomial sq(F101(), {f(0), f(0), f(1)});
  EXPECT_EQ(sq.eval(f(2)), f(2).pow(2));
  Polynomial three(F101(), {f(3)});
  EXPECT_EQ(three.eval(f(0)), f(3));

  Polynomial q = sq.div_linear(f(2), f(4));
  EXPECT_EQ(q, Polynomial(F101(), {f(2), f(1)}));
  EXPECT_TRUE(three.div_linear(f(9), f(3)).is_zero());
  EXPECT_THROW(sq.div_linear(f(2), f(5)), NonZeroRemainder);
}

TEST(Polynomial, DivisionMultipliesBack) {
  Rng rng(21);
  for (const PrimeField* field : {&PrimeField::small(1009), &PrimeField::bls12_381_scalar()}) {
    for (int i = 0; i < 100; ++i) {
      Polynomial g = random_poly(*field, rng, 1 + i % 12);
      Fe x = Fe::random(*field, rng);
      Fe y = g.eval(x);
      Polynomial q = g.div_linear(x, y);
      Polynomial lin(*field, {-x, Fe::one(*field)});
      EXPECT_EQ(q * lin + Polynomial(*field, {y}), g);
    }
  }
}

class GroupBackends : public ::testing::TestWithParam<int> {
 protected:
  const PairingGroup& group() const {
    return GetParam() == 0 ? PairingGroup::mock(PrimeField::small(1009)) : PairingGroup::bls12_381();
  }
};

TEST_P(GroupBackends, Bilinearity) {
  const auto& g = group();
  const auto& fr = g.scalar_field();
  Rng rng(7);
  GT base = g.pairing(g.g1_generator(), g.g2_generator());
  for (int i = 0; i < 100; ++i) {
    Fe a = Fe::random(fr, rng), b = Fe::random(fr, rng);
    GT lhs = g.pairing(g.g1_generator().mul(a), g.g2_generator().mul(b));
    EXPECT_EQ(lhs, base.pow(a * b));
  }
}

TEST_P(GroupBackends, GroupLaws) {
  const auto& g = group();
  const auto& fr = g.scalar_field();
  Rng rng(8);
  G1 h = g.g1_generator();
  for (int i = 0; i < 20; ++i) {
    Fe a = Fe::random(fr, rng), b = Fe::random(fr, rng);
    G1 p = h.mul(a), q = h.mul(b);
    EXPECT_EQ(p + q, h.mul(a + b));
    EXPECT_EQ(p + g.g1_identity(), p);
    EXPECT_TRUE((p - p).is_identity());
    EXPECT_EQ(q + p, p + q);
    G2 p2 = g.g2_generator().mul(a);
    EXPECT_EQ(p2 + g.g2_identity(), p2);
    EXPECT_TRUE((p2 - p2).is_identity());
  }
}

TEST_P(GroupBackends, SerializationRoundTrip) {
  const auto& g = group();
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    G1 p = g.g1_generator().mul(Fe::random(g.scalar_field(), rng));
    ByteWriter w;
    p.write(w);
    ByteReader r(w.bytes());
    EXPECT_EQ(G1::read(g, r), p);
    EXPECT_EQ(p.to_bytes().size(), g.g1_bytes());
    G2 q = g.g2_generator().mul(Fe::random(g.scalar_field(), rng));
    EXPECT_EQ(G2::from_bytes(g, q.to_bytes()), q);
  }
  EXPECT_EQ(G1::from_bytes(g, g.g1_identity().to_bytes()), g.g1_identity());
}

TEST_P(GroupBackends, PairingCheckCounts) {
  const auto& g = group();
  g.reset_pairing_checks();
  Fe a = Fe::from_u64(g.scalar_field(), 6);
  EXPECT_TRUE(g.pairing_check(g.g1_generator().mul(a), g.g2_generator(), g.g1_generator(),
                              g.g2_generator().mul(a)));
  EXPECT_FALSE(g.pairing_check(g.g1_generator().mul(a), g.g2_generator(), g.g1_generator(),
                               g.g2_generator()));
  EXPECT_EQ(g.pairing_checks(), 2u);
}

TEST_P(GroupBackends, MsmMatchesReference) {
  const auto& g = group();
  Rng rng(10);
  for (std::size_t n : {0, 1, 5, 40, 300}) {
    std::vector<Fe> s;
    std::vector<G1> p;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(Fe::random(g.scalar_field(), rng));
      p.push_back(g.g1_generator().mul(Fe::random(g.scalar_field(), rng)));
    }
    EXPECT_EQ(msm(g, s, p), msm_reference(g, s, p));
  }
  std::vector<Fe> one{Fe::one(g.scalar_field())};
  std::vector<G1> pt{g.g1_generator().mul(Fe::from_u64(g.scalar_field(), 42))};
  EXPECT_EQ(msm(g, one, pt), pt[0]);
  EXPECT_TRUE(msm(g, {}, {}).is_identity());
  std::vector<Fe> two(2, one[0]);
  EXPECT_THROW(msm(g, two, pt), std::invalid_argument);
}

TEST_P(GroupBackends, LadderAndTwoBaseMatchReference) {
  const auto& g = group();
  Rng rng(12);
  Fe x = Fe::random(g.scalar_field(), rng);
  EXPECT_EQ(power_ladder(g.g1_generator(), x, 33), power_ladder_reference(g.g1_generator(), x, 33));
  std::vector<Fe> a, b;
  for (int i = 0; i < 17; ++i) {
    a.push_back(Fe::random(g.scalar_field(), rng));
    b.push_back(Fe::random(g.scalar_field(), rng));
  }
  G1 q = g.hash_to_g1("test", Bytes{1, 2, 3});
  EXPECT_EQ(two_base_each(a, g.g1_generator(), b, q), two_base_each_reference(a, g.g1_generator(), b, q));
}

INSTANTIATE_TEST_SUITE_P(Backends, GroupBackends, ::testing::Values(0, 1),
                         [](const auto& info) { return info.param == 0 ? "Mock" : "Bls12381"; });

TEST(Msm, MockExample) {
  const auto& g = PairingGroup::mock(F101());
  std::vector<Fe> s{f(2), f(3)};
  std::vector<G1> p{G1::from_exponent(g, f(5)), G1::from_exponent(g, f(7))};
  EXPECT_EQ(msm(g, s, p), G1::from_exponent(g, f(31)));
}
