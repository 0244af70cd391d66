#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <numeric>

#include "arc/audit/audit.hpp"
#include "arc/ml/dataset.hpp"

using namespace arc;
using namespace arc::audit;
using ml::DoubleBackend;
using ml::MpcBackend;
using ml::PlainBackend;

namespace {

using Q = boost::rational<long long>;
using Dec = boost::multiprecision::cpp_dec_float_50;

const PrimeField& FM61() { return PrimeField::small((1ULL << 61) - 1); }

// P[X >= k] summed term by term in 50-digit decimal arithmetic.
Dec tail_reference(unsigned n, unsigned k, Dec tau) {
  Dec sum = 0;
  for (unsigned i = k; i <= n; ++i) {
    Dec binom = 1;
    for (unsigned t = 1; t <= i; ++t) binom = binom * (n - i + t) / t;
    sum += binom * pow(tau, i) * pow(1 - tau, n - i);
  }
  return sum;
}

// Brute-force Shapley of the K-NN utility; rows already in distance order.
std::vector<Q> knn_brute_force(const std::vector<Q>& Z, std::size_t K) {
  const std::size_t N = Z.size();
  auto utility = [&](std::uint32_t S) {
    Q u = 0;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < N && taken < K; ++i)
      if (S >> i & 1) {
        u += Z[i];
        ++taken;
      }
    return u / Q(static_cast<long long>(K));
  };
  std::vector<long long> fact(N + 1, 1);
  for (std::size_t i = 1; i <= N; ++i) fact[i] = fact[i - 1] * static_cast<long long>(i);
  std::vector<Q> phi(N, Q(0));
  for (std::size_t i = 0; i < N; ++i)
    for (std::uint32_t S = 0; S < (1u << N); ++S) {
      if (S >> i & 1) continue;
      const auto s = static_cast<std::size_t>(std::popcount(S));
      Q weight(fact[s] * fact[N - s - 1], fact[N]);
      phi[i] += weight * (utility(S | (1u << i)) - utility(S));
    }
  return phi;
}

// Exact Shapley values of v(S) = mean over rows of f(x_S, X_r on the rest).
std::vector<double> shapley_brute_force(const std::function<double(std::span<const double>)>& f,
                                        std::span<const double> x, std::span<const double> X, std::size_t rows) {
  const std::size_t n = x.size();
  auto value = [&](std::uint32_t S) {
    std::vector<double> pt(n);
    double s = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) pt[j] = (S >> j & 1) ? x[j] : X[r * n + j];
      s += f(pt);
    }
    return s / static_cast<double>(rows);
  };
  std::vector<double> phi(n + 1, 0.0);
  phi[0] = value(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t S = 0; S < (1u << n); ++S) {
      if (S >> i & 1) continue;
      const int s = std::popcount(S);
      double w = std::tgamma(s + 1.0) * std::tgamma(static_cast<double>(n) - s) / std::tgamma(n + 1.0);
      phi[i + 1] += w * (value(S | (1u << i)) - value(S));
    }
  return phi;
}

template <class B>
typename B::Vec reals(B& be, std::vector<double> v) {
  return be.constant(v);
}

template <class B>
typename B::Vec ints(B& be, std::vector<std::int64_t> v) {
  return be.constant_int(v);
}

// Logistic model that always predicts 1: zero weights with bias 5.
std::vector<double> always_one(std::size_t width) {
  std::vector<double> w(width + 1, 0.0);
  w.back() = 5.0;
  return w;
}

template <class B>
std::vector<PartyData<B>> share_parts(B& be, const std::vector<ml::Dataset>& ds) {
  std::vector<PartyData<B>> out;
  for (std::size_t i = 0; i < ds.size(); ++i)
    out.push_back({be.input(i, ds[i].x), be.input_int(i, ds[i].y), ds[i].rows});
  return out;
}

}  // namespace

// ------------------------------------------------------------ statistics

TEST(Binomial, TailMatchesExtendedPrecisionReference) {
  for (double tau : {0.5, 0.7, 0.9}) {
    for (unsigned n = 1; n <= 30; ++n) {
      for (unsigned k = 0; k <= n; ++k) {
        long double got = binomial_upper_tail(n, k, tau);
        Dec ref = tail_reference(n, k, Dec(tau));
        long double r = ref.convert_to<long double>();
        EXPECT_LE(std::fabs(got - r), 1e-15L * r) << "n=" << n << " k=" << k << " tau=" << tau;
      }
    }
  }
}

TEST(Binomial, EdgeCases) {
  EXPECT_EQ(binomial_upper_tail(10, 0, 0.3L), 1.0L);
  EXPECT_EQ(binomial_upper_tail(10, 11, 0.3L), 0.0L);
  EXPECT_NEAR(static_cast<double>(binomial_upper_tail(10, 10, 0.7L)), std::pow(0.7, 10), 1e-15);
  EXPECT_NEAR(std::pow(0.7, 10), 0.0282475249, 1e-10);
}

TEST(Binomial, TailMonotoneInTau) {
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + uniform_below(rng, 60);
    const std::size_t k = uniform_below(rng, n + 1);
    double a = uniform_unit(rng), b = uniform_unit(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(binomial_upper_tail(n, k, a), binomial_upper_tail(n, k, b) * (1 + 1e-15L));
    // A larger tau never turns a rejection into an acceptance.
    EXPECT_GE(certify_threshold(n, b, 0.05), certify_threshold(n, a, 0.05));
  }
}

TEST(Binomial, ThresholdIsFirstCertifyingCount) {
  EXPECT_EQ(certify_threshold(10, 0.7L, 0.05), 10u);
  EXPECT_EQ(certify_threshold(10, 0.75L, 0.05), 11u);  // 0.75^10 > 0.05
  const std::size_t n = 40;
  auto c = certify_threshold(n, 0.6L, 0.01);
  EXPECT_LE(binomial_upper_tail(n, c, 0.6L), 0.01L);
  EXPECT_GT(binomial_upper_tail(n, c - 1, 0.6L), 0.01L);
}

// ------------------------------------------------------------ certify_rs / certify_fair

TEST(CertifyRS, ConstantClassifierCertifiesAtTau07) {
  PlainBackend pb;
  const std::size_t width = 2;
  boost::math::normal_distribution<double> nd;
  RobustnessParams p{.R = 0.25 * boost::math::quantile(nd, 0.7), .sigma = 0.25, .n = 10, .alpha = 0.05};
  EXPECT_NEAR(p.tau(), 0.7, 1e-12);
  auto c = certify_rs(pb, reals(pb, always_one(width)), reals(pb, {0.3, 0.6}), ints(pb, {1}), width, p, 9);
  EXPECT_EQ(c.count, (std::vector<std::int64_t>{10}));
  EXPECT_EQ(c.threshold, 10u);
  EXPECT_EQ(c.certified, (std::vector<std::int64_t>{1}));
  EXPECT_NEAR(static_cast<double>(binomial_upper_tail(10, 10, p.tau())), 0.0282, 1e-4);
}

TEST(CertifyRS, ZeroCountRejects) {
  PlainBackend pb;
  RobustnessParams p{.R = 0.1, .sigma = 0.25, .n = 10, .alpha = 0.05};
  auto c = certify_rs(pb, reals(pb, always_one(2)), reals(pb, {0.3, 0.6}), ints(pb, {0}), 2, p, 9);
  EXPECT_EQ(c.count, (std::vector<std::int64_t>{0}));
  EXPECT_EQ(c.certified, (std::vector<std::int64_t>{0}));
}

TEST(CertifyRS, TauNearOneNeverCertifiesBelowFullCount) {
  const std::size_t n = 20;
  const long double tau = std_normal_cdf(8.0);  // R = 8 sigma
  for (std::size_t c = 0; c < n; ++c) EXPECT_GT(binomial_upper_tail(n, c, tau), 0.05L);
  EXPECT_GE(certify_threshold(n, tau, 0.05), n);
}

TEST(CertifyRS, InvalidParamsRejected) {
  PlainBackend pb;
  RobustnessParams p{.R = 0.1, .sigma = 0, .n = 10, .alpha = 0.05};
  EXPECT_THROW(certify_rs(pb, reals(pb, always_one(2)), reals(pb, {0, 0}), ints(pb, {1}), 2, p, 1), InvalidParams);
  p.sigma = 1;
  p.alpha = 1;
  EXPECT_THROW(p.validate(), InvalidParams);
}

TEST(CertifyRS, NoiseFollowsSigma) {
  auto noise = isotropic_noise(4000, 3, 0.5, 11);
  double s = 0, s2 = 0;
  for (double v : noise) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(noise.size());
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(s2 / n), 0.5, 0.02);
  EXPECT_EQ(noise, isotropic_noise(4000, 3, 0.5, 11));
}

TEST(CertifyFair, IsotropicThetaReducesToRandomizedSmoothing) {
  PlainBackend pb;
  const std::size_t width = 2;
  const double sigma = 0.25, R = 0.1;
  // A boundary through the query so decisions vary with the coin.
  auto w = reals(pb, {4.0, -4.0, 0.0});
  auto x = reals(pb, {0.8, 0.5});
  FairnessParams fp{.L = sigma * sigma / (R * R), .theta = {1 / (sigma * sigma), 0, 0, 1 / (sigma * sigma)}, .n = 12,
                    .alpha = 0.2};
  RobustnessParams rp{.R = R, .sigma = sigma, .n = 12, .alpha = 0.2};
  EXPECT_NEAR(fp.tau(), rp.tau(), 1e-12);
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto a = certify_fair(pb, w, x, ints(pb, {1}), width, fp, seed);
    auto b = certify_rs(pb, w, x, ints(pb, {1}), width, rp, seed);
    EXPECT_EQ(a.certified, b.certified) << seed;
    EXPECT_EQ(a.count, b.count) << seed;
    accepted += static_cast<int>(a.certified[0]);
  }
  EXPECT_GT(accepted, 0);
  EXPECT_LT(accepted, 50);
}

TEST(CertifyFair, LargeLipschitzConstantIsPermissive) {
  PlainBackend pb;
  FairnessParams fp{.L = 1e12, .theta = {4, 1, 1, 3}, .n = 100, .alpha = 0.05};
  EXPECT_NEAR(fp.tau(), 0.5, 1e-6);
  auto c = certify_fair(pb, reals(pb, always_one(2)), reals(pb, {0.3, 0.6}), ints(pb, {1}), 2, fp, 5);
  EXPECT_EQ(c.certified, (std::vector<std::int64_t>{1}));
}

TEST(CertifyFair, NonPositiveDefiniteThetaRejected) {
  PlainBackend pb;
  FairnessParams fp{.L = 1, .theta = {1, 2, 2, 1}, .n = 10, .alpha = 0.05};
  EXPECT_THROW(certify_fair(pb, reals(pb, always_one(2)), reals(pb, {0, 0}), ints(pb, {1}), 2, fp, 1),
               NotPositiveDefinite);
  fp.theta = {1, 0.5, 0, 1};
  EXPECT_THROW(fp.validate(2), NotPositiveDefinite);
}

TEST(CertifyFair, NoiseCovarianceIsThetaInverse) {
  std::vector<double> theta = {4, 1, 1, 3};
  auto noise = fairness_noise(20000, 2, theta, 3);
  double c00 = 0, c01 = 0, c11 = 0;
  const double n = 20000;
  for (std::size_t i = 0; i < 20000; ++i) {
    c00 += noise[2 * i] * noise[2 * i];
    c01 += noise[2 * i] * noise[2 * i + 1];
    c11 += noise[2 * i + 1] * noise[2 * i + 1];
  }
  // theta^-1 = [3 -1; -1 4] / 11
  EXPECT_NEAR(c00 / n, 3.0 / 11, 0.01);
  EXPECT_NEAR(c01 / n, -1.0 / 11, 0.01);
  EXPECT_NEAR(c11 / n, 4.0 / 11, 0.01);
}

// ------------------------------------------------------------ sorting

TEST(SortingNetwork, SortsEveryBinaryInput) {
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    auto layers = sorting_network(n);
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
      std::vector<int> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = m >> i & 1;
      for (const auto& layer : layers) {
        std::vector<bool> used(n, false);
        for (auto [a, b] : layer) {
          ASSERT_FALSE(used[a] || used[b]);
          used[a] = used[b] = true;
          if (v[a] > v[b]) std::swap(v[a], v[b]);
        }
      }
      ASSERT_TRUE(std::is_sorted(v.begin(), v.end())) << n << " " << m;
    }
  }
  EXPECT_THROW(sorting_network(6), InvalidParams);
}

TEST(SortingNetwork, ObliviousSortCarriesPayload) {
  PlainBackend pb;
  Rng rng(8);
  for (std::size_t n = 1; n <= 20; ++n) {
    std::vector<std::int64_t> keys(n), pay(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = static_cast<std::int64_t>(uniform_below(rng, 1000)) * 32 + static_cast<std::int64_t>(i) - 500 * 32;
      pay[i] = static_cast<std::int64_t>(i);
    }
    auto k = pb.constant_int(keys);
    std::vector<PlainBackend::Vec> p{pb.constant_int(pay)};
    oblivious_sort(pb, k, p);
    ASSERT_TRUE(std::is_sorted(k.begin(), k.end()));
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(k[i], keys[static_cast<std::size_t>(p[0][i])]);
  }
}

TEST(Median, OddAndEven) {
  PlainBackend pb;
  EXPECT_EQ(PlainBackend::decode(median(pb, reals(pb, {3, 1, 2}))), std::vector<double>{2});
  EXPECT_EQ(PlainBackend::decode(median(pb, reals(pb, {4, 1, 3, 2}))), std::vector<double>{2.5});
  EXPECT_EQ(PlainBackend::decode(median(pb, reals(pb, {-1}))), std::vector<double>{-1});
}

// ------------------------------------------------------------ KNN-Shapley

TEST(KnnShapley, HandRecursionExample) {
  std::vector<Q> Z = {Q(1), Q(0), Q(1)};
  auto s = knn_recursion<Q>(Z, 1);
  EXPECT_EQ(s, (std::vector<Q>{Q(5, 6), Q(-1, 6), Q(1, 3)}));
  EXPECT_EQ(knn_brute_force(Z, 1), s);
}

TEST(KnnShapley, RecursionEqualsBruteForceForSmallSets) {
  Rng rng(21);
  for (std::size_t N = 1; N <= 8; ++N) {
    for (std::size_t K = 1; K <= 3; ++K) {
      for (int pattern = 0; pattern < 50; ++pattern) {
        std::vector<Q> Z(N);
        for (auto& z : Z) z = Q(static_cast<long long>(rng() & 1));
        ASSERT_EQ(knn_recursion<Q>(Z, K), knn_brute_force(Z, K)) << "N=" << N << " K=" << K;
      }
    }
  }
}

TEST(KnnShapley, AllMatchingWithKEqualsNGivesUniformValues) {
  for (std::size_t N = 1; N <= 8; ++N) {
    std::vector<Q> Z(N, Q(1));
    for (const auto& s : knn_recursion<Q>(Z, N)) EXPECT_EQ(s, Q(1, static_cast<long long>(N)));
  }
}

TEST(KnnShapley, SingleRowIsItsIndicator) {
  EXPECT_EQ(knn_recursion<Q>(std::vector<Q>{Q(1)}, 1), std::vector<Q>{Q(1)});
  EXPECT_EQ(knn_recursion<Q>(std::vector<Q>{Q(0)}, 1), std::vector<Q>{Q(0)});
  // Fewer rows than neighbours: the lone row fills one of K slots.
  EXPECT_EQ(knn_recursion<Q>(std::vector<Q>{Q(1)}, 2), std::vector<Q>{Q(1, 2)});
}

TEST(KnnShapley, BackendMatchesSortedOracle) {
  PlainBackend pb;
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t N = 1 + uniform_below(rng, 12), width = 3, K = 1 + uniform_below(rng, 3);
    auto d = ml::adult_like(N, 1000 + static_cast<std::uint64_t>(trial));
    std::vector<double> X(N * width);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < width; ++j) X[i * width + j] = d.x[i * d.width + j];
    std::vector<double> x = {0.4, 0.3, 0.5};
    const std::int64_t yq = static_cast<std::int64_t>(rng() & 1);
    PartyData<PlainBackend> data{pb.constant(X), pb.constant_int(d.y), N};
    auto got = PlainBackend::decode(knn_shapley(pb, pb.constant(x), ints(pb, {yq}), data, width, K));
    // Oracle: distances in double, stable sort, exact recursion.
    std::vector<double> dist(N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < width; ++j) dist[i] += (X[i * width + j] - x[j]) * (X[i * width + j] - x[j]);
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    std::vector<Q> Z;
    for (auto i : order) Z.push_back(Q(d.y[i] == yq ? 1 : 0));
    auto s = knn_recursion<Q>(Z, K);
    for (std::size_t r = 0; r < N; ++r) {
      const double expect = boost::rational_cast<double>(s[r]);
      EXPECT_NEAR(got[order[r]], expect, static_cast<double>(N) * 0x1p-16) << "trial " << trial;
      EXPECT_LE(std::fabs(got[order[r]]), 1.0 + 1e-9);
    }
  }
}

TEST(KnnShapley, TiesBrokenByIndex) {
  PlainBackend pb;
  // Rows 0 and 2 are the same point; the lower index ranks first.
  PartyData<PlainBackend> data{reals(pb, {1, 1, 5, 5, 1, 1}), ints(pb, {1, 0, 0}), 3};
  auto got = PlainBackend::decode(knn_shapley(pb, reals(pb, {1, 1}), ints(pb, {1}), data, 2, 1));
  // Order (0, 2, 1), Z = (1, 0, 0): s = (1, 0, 0) in that order.
  EXPECT_NEAR(got[0], 1.0, 1e-4);
  EXPECT_NEAR(got[1], 0.0, 1e-4);
  EXPECT_NEAR(got[2], 0.0, 1e-4);
}

TEST(KnnShapley, EmptyDatasetRejected) {
  PlainBackend pb;
  PartyData<PlainBackend> data{pb.zeros(0), pb.zeros(0), 0};
  EXPECT_THROW(knn_shapley(pb, reals(pb, {0, 0}), ints(pb, {1}), data, 2, 1), InvalidParams);
}

// ------------------------------------------------------------ camel

TEST(Camel, PwlLogFollowsChords) {
  PlainBackend pb;
  std::vector<double> p = {1e-5, 0x1p-8, 0.003, 0.01, 0.1, 0.3, 0.5, 0.77, 1.0};
  auto got = PlainBackend::decode(pwl_ln(pb, reals(pb, p)));
  for (std::size_t i = 0; i < p.size(); ++i) {
    double q = std::max(p[i], 0x1p-8);
    double lo = std::exp2(std::floor(std::log2(q)));
    double hi = std::min(2 * lo, 1.0);
    double chord = lo == hi ? 0.0 : std::log(lo) + (q - lo) * (std::log(hi) - std::log(lo)) / (hi - lo);
    EXPECT_NEAR(got[i], chord, 2e-3) << p[i];
    EXPECT_LE(got[i], 1e-4);
  }
}

TEST(Camel, MadFlagsOnlyTheOutlier) {
  PlainBackend pb;
  auto f = mad_outliers(pb, reals(pb, {1.0, 1.1, 0.9, 1.05, 5.0}), 3.5);
  EXPECT_EQ(f, (std::vector<std::int64_t>{0, 0, 0, 0, 1}));
  auto none = mad_outliers(pb, reals(pb, {2.0, 2.0, 2.0}), 3.5);
  EXPECT_EQ(none, (std::vector<std::int64_t>{0, 0, 0}));
}

namespace {

// Party 0 alone labels the query's neighbourhood with 1; parties 1 and 2 hold
// identical copies of unrelated data.
std::vector<ml::Dataset> planted_parties() {
  ml::Dataset p0, other;
  p0.columns = other.columns = {"a", "b"};
  p0.width = other.width = 2;
  p0.rows = 4;
  p0.x = {0.9, 0.9, 0.8, 0.95, 0.95, 0.8, 0.85, 0.85};
  p0.y = {1, 1, 1, 1};
  other.rows = 4;
  other.x = {0.1, 0.1, 0.2, 0.05, 0.05, 0.2, 0.15, 0.1};
  other.y = {0, 0, 0, 0};
  return {p0, other, other};
}

}  // namespace

TEST(Camel, PlantedSourceIsFlagged) {
  PlainBackend pb;
  auto parts = share_parts(pb, planted_parties());
  auto all = union_of(pb, parts);
  auto w = ml::train(pb, all.X, pb.to_real(all.y), all.rows, 2, 3, {.epochs = 20, .batch = 4, .lr = 0.5});
  auto flags = camel_attribution(pb, w, reals(pb, {0.9, 0.85}), ints(pb, {1}), parts, 2, {});
  EXPECT_EQ(flags, (std::vector<std::int64_t>{1, 0, 0}));
}

TEST(Camel, IdenticalPartiesFlagNobody) {
  PlainBackend pb;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = ml::adult_like(6, seed);
    std::vector<ml::Dataset> ds(3, d);
    auto parts = share_parts(pb, ds);
    auto all = union_of(pb, parts);
    auto w = ml::train(pb, all.X, pb.to_real(all.y), all.rows, d.width, seed, {.epochs = 2, .batch = 6, .lr = 0.5});
    auto x = pb.constant(std::vector<double>(d.row(0).begin(), d.row(0).end()));
    auto scores = camel_scores(pb, w, x, ints(pb, {1}), parts, d.width, {});
    EXPECT_EQ(scores[0], scores[1]);
    EXPECT_EQ(scores[1], scores[2]);
    EXPECT_EQ(mad_outliers(pb, scores, 3.5), (std::vector<std::int64_t>{0, 0, 0})) << seed;
  }
}

TEST(Camel, ZeroEpochsGivesEqualScores) {
  PlainBackend pb;
  auto parts = share_parts(pb, planted_parties());
  auto w = reals(pb, {1.0, -0.5, 0.2});
  CamelParams cp{.epochs = 0};
  auto scores = camel_scores(pb, w, reals(pb, {0.9, 0.85}), ints(pb, {1}), parts, 2, cp);
  EXPECT_EQ(scores[0], scores[1]);
  EXPECT_EQ(scores[0], scores[2]);
  EXPECT_EQ(camel_attribution(pb, w, reals(pb, {0.9, 0.85}), ints(pb, {1}), parts, 2, cp),
            (std::vector<std::int64_t>{0, 0, 0}));
}

// ------------------------------------------------------------ KernelSHAP

TEST(KernelShap, LinearModelGivesExactAttributions) {
  Rng rng(17);
  for (std::size_t n = 2; n <= 5; ++n) {
    const std::size_t rows = 7;
    std::vector<double> w(n), x(n), X(rows * n), mean(n, 0.0);
    for (auto& v : w) v = standard_normal(rng);
    for (auto& v : x) v = standard_normal(rng);
    for (std::size_t i = 0; i < rows * n; ++i) {
      X[i] = standard_normal(rng);
      mean[i % n] += X[i] / rows;
    }
    auto model = [&](std::span<const double> p) { return std::inner_product(p.begin(), p.end(), w.begin(), 0.0); };
    auto phi = kernel_shap_fn(model, x, X, rows, all_coalitions(n));
    double base = std::inner_product(mean.begin(), mean.end(), w.begin(), 0.0);
    EXPECT_NEAR(phi[0], base, 1e-9);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(phi[i + 1], w[i] * (x[i] - mean[i]), 1e-6) << "n=" << n;
  }
}

TEST(KernelShap, ExhaustiveMatchesExactShapleyForNonlinearModel) {
  Rng rng(2);
  for (std::size_t n = 2; n <= 5; ++n) {
    const std::size_t rows = 5;
    std::vector<double> x(n), X(rows * n);
    for (auto& v : x) v = uniform_unit(rng);
    for (auto& v : X) v = uniform_unit(rng);
    auto model = [](std::span<const double> p) {
      double s = 0;
      for (std::size_t j = 0; j < p.size(); ++j) s += (j + 1.0) * p[j];
      return 1 / (1 + std::exp(-s)) + p[0] * p[1];
    };
    auto phi = kernel_shap_fn(model, x, X, rows, all_coalitions(n));
    auto ref = shapley_brute_force(model, x, X, rows);
    for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(phi[i], ref[i], 1e-6) << "n=" << n << " i=" << i;
  }
}

TEST(KernelShap, TwoFeaturesMatchBruteForce) {
  std::vector<double> x = {0.7, -0.2}, X = {0.1, 0.4, -0.3, 0.9, 0.5, 0.0};
  auto model = [](std::span<const double> p) { return p[0] * p[1] + std::sin(p[0]); };
  auto phi = kernel_shap_fn(model, x, X, 3, all_coalitions(2));
  auto ref = shapley_brute_force(model, x, X, 3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(phi[i], ref[i], 1e-8);
}

TEST(KernelShap, QueryAtMeanGivesZeroAttributions) {
  std::vector<double> w = {0.5, -1.5, 2.0};
  std::vector<double> X = {1, 2, 3, 3, 0, 1, 2, 1, 2};
  std::vector<double> x = {2, 1, 2};
  auto model = [&](std::span<const double> p) { return std::inner_product(p.begin(), p.end(), w.begin(), 0.0); };
  auto phi = kernel_shap_fn(model, x, X, 3, all_coalitions(3));
  for (std::size_t i = 1; i <= 3; ++i) EXPECT_NEAR(phi[i], 0.0, 1e-9);
}

TEST(KernelShap, KernelWeights) {
  EXPECT_DOUBLE_EQ(shapley_kernel_weight(4, 1), 3.0 / (4 * 1 * 3));
  EXPECT_DOUBLE_EQ(shapley_kernel_weight(4, 2), 3.0 / (6 * 2 * 2));
  EXPECT_THROW(shapley_kernel_weight(4, 0), InvalidParams);
  EXPECT_THROW(shapley_kernel_weight(4, 4), InvalidParams);
}

TEST(KernelShap, DegenerateCoalitionsReportSingular) {
  Coalitions c{.width = 3, .count = 4, .z = {1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0}};
  EXPECT_THROW(kernel_shap_map(c), SingularSystem);
  EXPECT_THROW(sample_coalitions(3, 3, 1), InvalidParams);
}

TEST(KernelShap, SampledCoalitionsAreProper) {
  auto c = sample_coalitions(5, 200, 4);
  for (std::size_t k = 0; k < c.count; ++k) {
    std::size_t s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += c.in(k, j);
    EXPECT_GE(s, 1u);
    EXPECT_LE(s, 4u);
  }
  EXPECT_EQ(c.z, sample_coalitions(5, 200, 4).z);
}

TEST(KernelShap, FixedPointPathTracksFloatPath) {
  PlainBackend pb;
  auto d = ml::adult_like(8, 4);
  const std::size_t width = 3;
  std::vector<double> X;
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < width; ++j) X.push_back(d.x[i * d.width + j]);
  std::vector<double> w = {2.0, -1.0, 1.5, -0.4}, x = {0.6, 0.2, 0.7};
  auto c = all_coalitions(width);
  auto got = PlainBackend::decode(
      kernel_shap(pb, pb.constant(w), pb.constant(x), PartyData<PlainBackend>{pb.constant(X), pb.zeros(8), 8}, width, c));
  auto model = [&](std::span<const double> p) {
    double z = w.back();
    for (std::size_t j = 0; j < width; ++j) z += w[j] * p[j];
    return z < -2 ? 0.0 : z > 2 ? 1.0 : 0.5 + z / 4;
  };
  auto ref = kernel_shap_fn(model, x, X, d.rows, c);
  double total = 0;
  for (std::size_t i = 0; i <= width; ++i) {
    EXPECT_NEAR(got[i], ref[i], 1e-3);
    total += got[i];
  }
  EXPECT_NEAR(total, model(x), 1e-3);  // local accuracy
}

// ------------------------------------------------------------ dual execution

TEST(DualExecution, AllFunctionsAgreeBitForBit) {
  const std::size_t width = 3;
  std::vector<AuditSpec> specs;
  specs.push_back(AuditSpec::from_json({{"function", "certify_rs"}, {"R", 0.2}, {"sigma", 0.3}, {"n", 12}, {"alpha", 0.1}}));
  specs.push_back(AuditSpec::from_json(
      {{"function", "certify_fair"}, {"L", 2.0}, {"theta", {{4, 1, 0}, {1, 4, 0}, {0, 0, 2}}}, {"n", 12}, {"alpha", 0.1}}));
  specs.push_back(AuditSpec::from_json({{"function", "knn_shapley"}, {"K", 2}}));
  specs.push_back(AuditSpec::from_json({{"function", "camel"}, {"epochs", 2}}));
  specs.push_back(AuditSpec::from_json({{"function", "kernel_shap"}, {"samples", 0}}));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<ml::Dataset> ds;
    for (std::size_t p = 0; p < 3; ++p) {
      auto full = ml::adult_like(4, seed * 10 + p);
      ml::Dataset d;
      d.columns = {"a", "b", "c"};
      d.width = width;
      d.rows = full.rows;
      d.y = full.y;
      for (std::size_t i = 0; i < d.rows; ++i)
        for (std::size_t j = 0; j < width; ++j) d.x.push_back(full.x[i * full.width + j]);
      ds.push_back(d);
    }
    std::vector<double> x = {0.5, 0.4, 0.45};
    const std::int64_t yq = static_cast<std::int64_t>(seed & 1);
    PlainBackend pb;
    auto pparts = share_parts(pb, ds);
    auto pall = union_of(pb, pparts);
    ml::TrainConfig cfg{.epochs = 2, .batch = 6, .lr = 0.5};
    auto pw = ml::train(pb, pall.X, pb.to_real(pall.y), pall.rows, width, seed, cfg);

    mpc::Engine e(FM61(), {.parties = 3, .seed = seed});
    MpcBackend mb(e);
    auto mparts = share_parts(mb, ds);
    auto mall = union_of(mb, mparts);
    auto mw = ml::train(mb, mall.X, mb.to_real(mall.y), mall.rows, width, seed, cfg);
    ASSERT_EQ(mb.open_int(mw), pw) << "training, seed " << seed;
    auto mx = mb.input(std::nullopt, x);
    auto my = mb.input_int(std::nullopt, std::vector<std::int64_t>{yq});
    ASSERT_EQ(mb.open_int(ml::predict(mb, mw, mx, 1, width).score), ml::predict(pb, pw, pb.constant(x), 1, width).score);
    for (const auto& spec : specs) {
      auto pv = run_function(pb, spec, pw, pb.constant(x), ints(pb, {yq}), pparts, width, seed);
      auto mv = run_function(mb, spec, mw, mx, my, mparts, width, seed);
      EXPECT_EQ(mb.open_int(mv.value), pv.value) << to_string(spec.function) << " seed " << seed;
      EXPECT_EQ(mv.is_int, pv.is_int);
    }
  }
}

TEST(AuditSpec, JsonRoundTrip) {
  auto s = AuditSpec::from_json({{"function", "certify_fair"}, {"L", 2.0}, {"theta", {{2, 0}, {0, 2}}}, {"n", 7}});
  auto back = AuditSpec::from_json(s.to_json());
  EXPECT_EQ(back.function, Function::CertifyFair);
  EXPECT_EQ(back.fair.theta, s.fair.theta);
  EXPECT_EQ(back.fair.n, 7u);
  EXPECT_THROW(AuditSpec::from_json({{"function", "influence"}}), InvalidParams);
  EXPECT_THROW(AuditSpec::from_json({{"function", "knn_shapley"}, {"K", 0}}), InvalidParams);
}
