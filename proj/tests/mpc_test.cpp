#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <set>

#include "arc/algebra/msm.hpp"
#include "arc/commit/kzg.hpp"
#include "arc/commit/pedersen.hpp"
#include "arc/mpc/engine.hpp"
#include "arc/mpc/fixed.hpp"
#include "arc/mpc/protocols.hpp"

using namespace arc;
using namespace arc::mpc;

namespace {

const PrimeField& F101() { return PrimeField::small(101); }
// 2^61 - 1: large enough for 64-bit conversions with small kappa and for
// 10-bit conversions with kappa = 40.
const PrimeField& FM61() { return PrimeField::small((1ULL << 61) - 1); }

std::vector<Fe> fes(const PrimeField& f, std::initializer_list<std::int64_t> v) {
  std::vector<Fe> out;
  for (auto x : v) out.push_back(Fe::from_i64(f, x));
  return out;
}

std::vector<Fe> random_fes(const PrimeField& f, std::size_t n, Rng& rng) {
  std::vector<Fe> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Fe::random(f, rng));
  return out;
}

std::vector<std::uint64_t> to_u64(std::span<const std::int64_t> v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST(Input, ZeroVectorReconstructsToZero) {
  Engine e(F101());
  auto z = fes(F101(), {0, 0, 0, 0});
  EXPECT_EQ(e.input(0, z).reveal_for_testing(), z);
}

TEST(Input, SharesSumToSecretModP) {
  Engine e(F101(), {.parties = 3, .seed = 5});
  auto x = fes(F101(), {7});
  FShared s = e.input(1, x);
  ASSERT_EQ(s.parties(), 3u);
  std::uint64_t sum = 0;
  for (const auto& share : s.s) sum += share[0].low_u64();
  EXPECT_EQ(sum % 101, 7u);
  // Shares are not trivially the secret held by one party.
  std::set<std::uint64_t> distinct;
  for (const auto& share : s.s) distinct.insert(share[0].low_u64());
  EXPECT_GT(distinct.size(), 1u);
}

TEST(Open, RoundTripAndEmptyRecipients) {
  Engine e(F101());
  auto x = fes(F101(), {1, 50, 100});
  FShared s = e.input(std::nullopt, x);
  EXPECT_EQ(e.open(s), x);
  Stats before = e.stats();
  EXPECT_TRUE(e.open_to(s, 0).empty());
  Stats d = e.stats() - before;
  EXPECT_EQ(d.rounds, 0u);
  EXPECT_EQ(d.opened_values, 0u);
}

TEST(Lincomb, MatchesPlaintextWithZeroRounds) {
  const auto& f = FM61();
  Engine e(f);
  Rng rng(3);
  auto a = random_fes(f, 10, rng), b = random_fes(f, 10, rng);
  FShared sa = e.input(0, a), sb = e.input(1, b);
  auto coeffs = random_fes(f, 2, rng);
  std::vector<FShared> vs{sa, sb};
  Stats before = e.stats();
  FShared c = lincomb(coeffs, vs);
  EXPECT_EQ((e.stats() - before).rounds, 0u);
  auto opened = e.open(c);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(opened[i], coeffs[0] * a[i] + coeffs[1] * b[i]);

  std::vector<Fe> one{Fe::one(f)};
  std::vector<FShared> single{sa};
  EXPECT_EQ(lincomb(one, single).reveal_for_testing(), a);
  std::vector<Fe> zeros{Fe::zero(f), Fe::zero(f)};
  for (const auto& v : lincomb(zeros, vs).reveal_for_testing()) EXPECT_TRUE(v.is_zero());
}

TEST(Lincomb, RejectsMismatchedDomains) {
  Engine e1(F101()), e2(FM61());
  auto x1 = fes(F101(), {1}), x2 = fes(FM61(), {1});
  std::vector<FShared> vs{e1.input(0, x1), e2.input(0, x2)};
  auto coeffs = fes(F101(), {1, 1});
  EXPECT_THROW(lincomb(coeffs, vs), std::invalid_argument);
}

TEST(Mul, ExamplesAndRandomCases) {
  const auto& f = FM61();
  Engine e(f, {.parties = 4, .seed = 9});
  Rng rng(11);
  auto b = random_fes(f, 50, rng), a = random_fes(f, 50, rng);
  FShared sb = e.input(0, b), sa = e.input(1, a);

  std::vector<Fe> zero(50, Fe::zero(f)), one(50, Fe::one(f));
  FShared z = FShared::constant(f, 4, zero), o = FShared::constant(f, 4, one);
  for (const auto& v : e.open(e.mul(z, sb))) EXPECT_TRUE(v.is_zero());
  EXPECT_EQ(e.open(e.mul(o, sb)), b);

  Stats before = e.stats();
  FShared c = e.mul(sa, sb);
  Stats d = e.stats() - before;
  EXPECT_EQ(d.rounds, 1u);
  EXPECT_EQ(d.multiplications, 50u);
  auto opened = e.open(c);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(opened[i], a[i] * b[i]);
}

TEST(Rounds, OpenCostsOneRound) {
  Engine e(F101());
  FShared s = e.input(0, fes(F101(), {3, 4}));
  Stats before = e.stats();
  e.open(s);
  Stats d = e.stats() - before;
  EXPECT_EQ(d.rounds, 1u);
  EXPECT_EQ(d.opened_values, 2u);
}

TEST(Mul, TripleExhaustion) {
  Engine e(F101(), {.triple_budget = 3});
  FShared s = e.input(0, fes(F101(), {1, 2}));
  EXPECT_NO_THROW(e.mul(s, s));
  EXPECT_THROW(e.mul(s, s), TripleExhausted);
}

TEST(Coin, DeterministicUnderSeed) {
  Engine a(FM61(), {.seed = 42}), b(FM61(), {.seed = 42}), c(FM61(), {.seed = 43});
  std::vector<Fe> va, vb, vc;
  for (int i = 0; i < 5; ++i) {
    va.push_back(a.coin());
    vb.push_back(b.coin());
    vc.push_back(c.coin());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
}

TEST(Coin, UniformOverSmallField) {
  // Pearson chi-square against the uniform distribution on F_101.
  Engine e(F101(), {.seed = 7});
  std::vector<double> counts(101, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[e.coin().low_u64()] += 1;
  const double expected = draws / 101.0;
  double stat = 0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(100);
  EXPECT_LT(stat, boost::math::quantile(dist, 0.999));
  EXPECT_GT(stat, boost::math::quantile(dist, 0.001));
}

TEST(Coin, DisagreementIsDetected) {
  Engine e(F101());
  e.set_coin_fault(1);
  EXPECT_THROW(e.coin(), CoinDisagreement);
  EXPECT_NO_THROW(e.coin());
}

TEST(Coin, SharedRandomnessReconstructs) {
  Engine e(FM61());
  FShared r = e.rand_shared(8);
  auto v = r.reveal_for_testing();
  EXPECT_EQ(e.open(r), v);
  std::set<std::uint64_t> distinct;
  for (const auto& x : v) distinct.insert(x.low_u64());
  EXPECT_EQ(distinct.size(), 8u);
}

TEST(Circuit, RandomCircuitsMatchPlaintext) {
  const auto& f = FM61();
  Rng rng(2024);
  for (int circuit = 0; circuit < 200; ++circuit) {
    Engine e(f, {.parties = static_cast<std::size_t>(2 + circuit % 4), .seed = static_cast<std::uint64_t>(circuit)});
    const std::size_t width = 1 + uniform_below(rng, 4);
    std::vector<std::vector<Fe>> plain;
    std::vector<FShared> shared;
    std::vector<int> depth;
    for (int i = 0; i < 3; ++i) {
      plain.push_back(random_fes(f, width, rng));
      shared.push_back(e.input(i % e.parties(), plain.back()));
      depth.push_back(0);
    }
    const int gates = 4 + static_cast<int>(uniform_below(rng, 8));
    for (int g = 0; g < gates; ++g) {
      std::size_t i = uniform_below(rng, plain.size()), j = uniform_below(rng, plain.size());
      int d = std::max(depth[i], depth[j]) + 1;
      if (d > 6) continue;
      std::vector<Fe> out(width);
      if (uniform_below(rng, 2) == 0) {
        auto c = random_fes(f, 2, rng);
        for (std::size_t t = 0; t < width; ++t) out[t] = c[0] * plain[i][t] + c[1] * plain[j][t];
        std::vector<FShared> vs{shared[i], shared[j]};
        shared.push_back(lincomb(c, vs));
      } else {
        for (std::size_t t = 0; t < width; ++t) out[t] = plain[i][t] * plain[j][t];
        shared.push_back(e.mul(shared[i], shared[j]));
      }
      plain.push_back(out);
      depth.push_back(d);
    }
    ASSERT_EQ(e.open(shared.back()), plain.back()) << "circuit " << circuit;
  }
}

TEST(Tamper, SemiHonestOpenIsCorrupted) {
  Engine e(F101());
  FShared s = e.input(0, fes(F101(), {5}));
  e.set_open_tamper(OpenTamper{.party = 2});
  EXPECT_NE(e.open(s), fes(F101(), {5}));
  EXPECT_EQ(e.open(s), fes(F101(), {5}));  // count = 1
}

TEST(Tamper, AbortModes) {
  Engine e(F101(), {.mode = Mode::WithAbort});
  FShared s = e.input(0, fes(F101(), {5}));
  e.set_open_tamper(OpenTamper{.party = 1, .skip = 1});
  EXPECT_NO_THROW(e.open(s));
  EXPECT_THROW(e.open(s), Abort);

  e.set_mode(Mode::Identifiable);
  e.set_open_tamper(OpenTamper{.party = 2});
  try {
    e.open(s);
    FAIL() << "expected an identified abort";
  } catch (const IdentifiedAbort& ex) {
    EXPECT_EQ(ex.party, 2u);
  }
  e.set_open_tamper(OpenTamper{.party = 0});
  CheckedOpen c = e.open_checked(s);
  EXPECT_EQ(c.values, fes(F101(), {5}));
  EXPECT_EQ(c.culprits, std::vector<std::size_t>{0});
}

TEST(Tamper, InternalOpeningsAreNeverTampered) {
  Engine e(FM61(), {.mode = Mode::WithAbort});
  std::vector<std::int64_t> x{5, -9};
  RShared r = e.input_ring(0, to_u64(x));
  e.set_open_tamper(OpenTamper{.party = 0});
  EXPECT_NO_THROW(ring_to_field(e, r, 16, 20));
  EXPECT_THROW(e.open_ring(r), Abort);
}

TEST(Transcript, RecordsEveryRound) {
  Engine e(F101(), {.record_transcript = true});
  FShared s = e.input(0, fes(F101(), {5, 6}));
  e.mul(s, s);
  e.open(s);
  auto j = e.transcript_json();
  ASSERT_TRUE(j.contains("rounds"));
  EXPECT_EQ(j["rounds"].size(), e.stats().rounds);
  for (const auto& r : j["rounds"]) EXPECT_EQ(r["bytes"].size(), e.parties());
}

// ---- binary sub-protocols ----

TEST(Adder, SharedAndPublicAddersMatchPlaintext) {
  Engine e(F101(), {.parties = 3, .seed = 4});
  Rng rng(8);
  const unsigned w = 64;
  std::vector<std::uint64_t> a(100), b(100);
  for (auto& v : a) v = rng();
  for (auto& v : b) v = rng();
  auto ea = e.edabits_ring(100, w);
  auto ra = ea.r.reveal_for_testing();
  std::vector<std::vector<std::uint64_t>> pub;
  for (unsigned j = 0; j < w; ++j) pub.push_back(public_plane(b, j));

  Stats before = e.stats();
  BitPlanes s1 = add_public_shared(e, pub, ea.bits, w);
  // Bit 0 has a public carry, the top bit needs no carry out.
  EXPECT_EQ((e.stats() - before).rounds, w - 2);
  BitPlanes s2 = add_public_shared(e, pub, ea.bits, w, true);
  auto eb = e.edabits_ring(100, w);
  auto rb = eb.r.reveal_for_testing();
  BitPlanes s3 = add_shared(e, ea.bits, eb.bits, w);

  auto value = [](const BitPlanes& p, std::size_t i) {
    std::uint64_t v = 0;
    for (std::size_t j = 0; j < p.size(); ++j) v |= std::uint64_t{get_bit(p[j].reveal_for_testing(), i)} << j;
    return v;
  };
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(value(s1, i), ra[i] + b[i]);
    EXPECT_EQ(value(s2, i), ra[i] + b[i] + 1);
    EXPECT_EQ(value(s3, i), ra[i] + rb[i]);
  }
}

TEST(Adder, OrAllMatchesPlaintext) {
  Engine e(F101());
  Rng rng(1);
  std::vector<BShared> planes;
  std::vector<std::uint64_t> expect(1, 0);
  for (int j = 0; j < 5; ++j) {
    std::vector<std::uint64_t> w{rng() & rng() & rng()};
    expect[0] |= w[0];
    planes.push_back(BShared::constant(3, 64, w));
  }
  EXPECT_EQ(or_all(e, planes).reveal_for_testing(), expect);
}

TEST(BitDecompose, RecoversEveryBitAndSign) {
  Engine e(F101());
  std::vector<std::int64_t> x{0, 1, -1, 12345, -12345, INT64_MAX, INT64_MIN};
  RShared s = e.input_ring(0, to_u64(x));
  BitPlanes planes = bit_decompose(e, s);
  ASSERT_EQ(planes.size(), 64u);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t v = 0;
    for (unsigned j = 0; j < 64; ++j) v |= std::uint64_t{get_bit(planes[j].reveal_for_testing(), i)} << j;
    EXPECT_EQ(v, static_cast<std::uint64_t>(x[i]));
  }
  auto neg = ltz(e, s).reveal_for_testing();
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(neg[i], x[i] < 0 ? 1u : 0u);
}

// ---- fixed point ----

TEST(Fixed, Examples) {
  EXPECT_EQ(fx_encode(0.0), 0);
  EXPECT_EQ(fx_mul_trunc(fx_encode(1.0), fx_encode(1.0)), fx_encode(1.0));
  // 0.5 * 0.5 with f = 16: 32768 * 32768 = 2^30, shifted by 16 gives 2^14.
  EXPECT_EQ(fx_mul_trunc(fx_encode(0.5), fx_encode(0.5)), std::int64_t{1} << 14);
  EXPECT_EQ(fx_decode(fx_mul_trunc(fx_encode(0.5), fx_encode(0.5))), 0.25);
  EXPECT_EQ(fx_trunc(-3, 1), -1);
  EXPECT_THROW(fx_mul_raw(INT64_MAX, 2), FixedOverflow);
  EXPECT_THROW(fx_encode(1e300), FixedOverflow);
}

TEST(Fixed, SharedTruncationIsExact) {
  Engine e(F101(), {.seed = 77});
  Rng rng(5);
  std::vector<std::int64_t> x, a, b;
  for (int i = 0; i < 200; ++i) {
    x.push_back(static_cast<std::int64_t>(rng()) >> 3);
    a.push_back(static_cast<std::int64_t>(rng()) >> 34);
    b.push_back(static_cast<std::int64_t>(rng()) >> 34);
  }
  x.push_back(-1);
  x.push_back(-(1 << 16));
  x.push_back(-(1 << 16) - 1);
  x.push_back(0);
  RShared sx = e.input_ring(0, to_u64(x));
  auto t = e.open_ring(trunc_exact(e, sx, kFracBits));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(static_cast<std::int64_t>(t[i]), fx_trunc(x[i])) << x[i];

  RShared sa = e.input_ring(0, to_u64(a)), sb = e.input_ring(1, to_u64(b));
  auto m = e.open_ring(mul_trunc(e, sa, sb, kFracBits));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(static_cast<std::int64_t>(m[i]), fx_mul_trunc(a[i], b[i]));
}

// ---- share conversion ----

TEST(Convert, ZeroAndNegativeExamples) {
  const auto& f = PrimeField::bls12_381_scalar();
  Engine e(f);
  std::vector<std::int64_t> x{0, -3, 3, 127, -128};
  FShared y = ring_to_field(e, e.input_ring(0, to_u64(x)), 8);
  auto v = e.open(y);
  EXPECT_TRUE(v[0].is_zero());
  // Plaintext oracle: p - 3 is the additive inverse of 3.
  EXPECT_EQ(v[1], Fe::zero(f) - Fe::from_u64(f, 3));
  EXPECT_EQ(v[1] + Fe::from_u64(f, 3), Fe::zero(f));
  EXPECT_EQ(v[2], Fe::from_u64(f, 3));
  EXPECT_EQ(v[3], Fe::from_u64(f, 127));
  EXPECT_EQ(v[4], Fe::from_i64(f, -128));
}

TEST(Convert, RangeBoundaryRejected) {
  Engine e(PrimeField::bls12_381_scalar());
  std::vector<std::uint64_t> x{128};
  EXPECT_THROW(ring_to_field(e, e.input_ring(0, x), 8), RangeViolation);
  std::vector<std::int64_t> y{-129};
  EXPECT_THROW(ring_to_field(e, e.input_ring(0, to_u64(y)), 8), RangeViolation);
  std::vector<Fe> z{Fe::from_u64(PrimeField::bls12_381_scalar(), 128)};
  EXPECT_THROW(field_to_ring(e, e.input(0, z), 8), RangeViolation);
}

TEST(Convert, FieldTooSmallRejected) {
  Engine e(F101());
  std::vector<std::uint64_t> x{1};
  EXPECT_THROW(ring_to_field(e, e.input_ring(0, x), 8, 40), std::invalid_argument);
}

TEST(Convert, RoundTripOverEveryTenBitValue) {
  Engine e(FM61(), {.seed = 10});
  std::vector<std::int64_t> x;
  for (std::int64_t v = -512; v < 512; ++v) x.push_back(v);
  RShared r = e.input_ring(0, to_u64(x));
  FShared y = ring_to_field(e, r, 10, 40);
  auto fy = e.open(y);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(fy[i], Fe::from_i64(FM61(), x[i]));
  auto back = e.open_ring(field_to_ring(e, y, 10, 40));
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(static_cast<std::int64_t>(back[i]), x[i]);
}

TEST(Convert, RoundTripFullWidth) {
  const auto& f = PrimeField::bls12_381_scalar();
  Engine e(f, {.seed = 12});
  Rng rng(99);
  std::vector<std::int64_t> x{INT64_MIN, INT64_MAX, 0, -1};
  while (x.size() < 1000) x.push_back(static_cast<std::int64_t>(rng()));
  FShared y = ring_to_field(e, e.input_ring(0, to_u64(x)), 64, 40);
  auto fy = e.open(y);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(fy[i], Fe::from_i64(f, x[i]));
  auto back = e.open_ring(field_to_ring(e, y, 64, 40));
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(static_cast<std::int64_t>(back[i]), x[i]);
}

TEST(Convert, MaskedOpeningsSpreadOverMaskRange) {
  Engine e(FM61(), {.seed = 13});
  const unsigned l = 8, kappa = 8;
  std::vector<std::int64_t> x(4096, -5);
  std::vector<unsigned __int128> eps;
  ring_to_field(e, e.input_ring(0, to_u64(x)), l, kappa, &eps);
  std::set<std::uint64_t> distinct;
  for (auto v : eps) {
    distinct.insert(static_cast<std::uint64_t>(v));
    EXPECT_LT(v, static_cast<unsigned __int128>(1) << (l + kappa + 1));
  }
  EXPECT_GE(distinct.size(), 1u << kappa);

  std::vector<std::int64_t> y(64, 7);
  ring_to_field(e, e.input_ring(0, to_u64(y)), 16, 40, &eps);
  std::set<unsigned __int128> wide(eps.begin(), eps.end());
  EXPECT_EQ(wide.size(), y.size());
}

// ---- distributed commitments ----

class DistCommit : public ::testing::TestWithParam<bool> {
 protected:
  const PairingGroup& group() const {
    return GetParam() ? PairingGroup::bls12_381() : PairingGroup::mock(PrimeField::small(1000003));
  }
};

TEST_P(DistCommit, PedersenMatchesCentralized) {
  const auto& g = group();
  const auto& f = g.scalar_field();
  auto pp = pedersen_setup(g, 6);
  Engine e(f, {.parties = 2, .seed = 21});
  Rng rng(4);
  auto m = random_fes(f, 6, rng), r = random_fes(f, 1, rng);
  FShared sm = e.input(0, m), sr = e.input(1, r);
  GShared c = dist_commit_pedersen(pp, sm, sr);
  auto opened = e.open_group(c);
  EXPECT_EQ(opened[0], pedersen_commit(pp, m, r[0]));

  std::vector<Fe> zm(6, Fe::zero(f)), zr{Fe::zero(f)};
  GShared z = dist_commit_pedersen(pp, e.input(0, zm), e.input(0, zr));
  EXPECT_TRUE(e.open_group(z)[0].is_identity());

  // Linearity: commit(a*m + b*m', a*r + b*r') = a*c + b*c'.
  auto m2 = random_fes(f, 6, rng), r2 = random_fes(f, 1, rng);
  auto ab = random_fes(f, 2, rng);
  std::vector<FShared> ms{sm, e.input(0, m2)}, rs{sr, e.input(1, r2)};
  GShared lc = dist_commit_pedersen(pp, lincomb(ab, ms), lincomb(ab, rs));
  EXPECT_EQ(e.open_group(lc)[0], ab[0] * pedersen_commit(pp, m, r[0]) + ab[1] * pedersen_commit(pp, m2, r2[0]));
}

TEST_P(DistCommit, KzgMatchesCentralized) {
  const auto& g = group();
  const auto& f = g.scalar_field();
  auto pp = kzg_setup(g, 3, 9);
  Engine e(f, {.parties = 3, .seed = 22});
  Rng rng(6);
  auto v = random_fes(f, 8, rng), r = random_fes(f, 1, rng);
  FShared sv = e.input(0, v), sr = e.input(2, r);
  G1 c = e.open_group(dist_commit_kzg(pp, sv, 0, sr))[0];
  EXPECT_EQ(c, kzg_commit(pp, Polynomial(f, v), r[0]));

  std::vector<Fe> zv(8, Fe::zero(f)), zr{Fe::zero(f)};
  EXPECT_TRUE(e.open_group(dist_commit_kzg(pp, e.input(0, zv), 0, e.input(0, zr)))[0].is_identity());

  auto v2 = random_fes(f, 8, rng), r2 = random_fes(f, 1, rng);
  G1 c2 = e.open_group(dist_commit_kzg(pp, e.input(1, v2), 0, e.input(1, r2)))[0];
  std::vector<Fe> sum(8, Fe::zero(f));
  for (std::size_t i = 0; i < 8; ++i) sum[i] = v[i] + v2[i];
  EXPECT_EQ(c + c2, kzg_commit(pp, Polynomial(f, sum), r[0] + r2[0]));

  std::vector<Fe> too_long(11, Fe::one(f));
  EXPECT_THROW(dist_commit_kzg(pp, e.input(0, too_long), 0, sr), DegreeOverflow);
}

INSTANTIATE_TEST_SUITE_P(Backends, DistCommit, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "Bls12381" : "Mock"; });
