#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "arc/ml/backend.hpp"
#include "arc/ml/dataset.hpp"
#include "arc/ml/logreg.hpp"

using namespace arc;
using namespace arc::ml;

namespace {

const PrimeField& FM61() { return PrimeField::small((1ULL << 61) - 1); }

// Two clusters on either side of the line x1 + x2 = 0.
Dataset separable8() {
  Dataset d;
  d.columns = {"x1", "x2"};
  d.width = 2;
  d.rows = 8;
  d.x = {1, 1, 1.5, 0.5, 2, 1, 1, 2, -1, -1, -0.5, -1.5, -2, -1, -1, -2};
  d.y = {1, 1, 1, 1, 0, 0, 0, 0};
  return d;
}

template <class B>
typename B::Vec train_on(B& be, const Dataset& d, std::uint64_t J, const TrainConfig& cfg) {
  auto X = be.input(0, d.x);
  auto y = be.input(0, d.labels_real());
  return train(be, X, y, d.rows, d.width, J, cfg);
}

template <class B>
double accuracy(B& be, const typename B::Vec& w, const Dataset& d) {
  auto p = predict(be, w, be.constant(d.x), d.rows, d.width);
  auto labels = be.open_int(p.label);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows; ++i) ok += labels[i] == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.rows);
}

// Reference piecewise sigmoid and its antiderivative.
double sigma_ref(double z) { return z < -2 ? 0.0 : z > 2 ? 1.0 : 0.5 + z / 4; }
double F_ref(double z) { return z < -2 ? 0.0 : z > 2 ? z : (z + 2) * (z + 2) / 8; }

}  // namespace

TEST(Sigmoid, SegmentsMatchReference) {
  PlainBackend pb;
  DoubleBackend db;
  std::vector<double> z = {-5, -2.5, -2, -1, -0.25, 0, 0.75, 1.5, 2, 2.0001, 7};
  auto plain = PlainBackend::decode(sigmoid_pwl(pb, pb.constant(z)));
  auto dbl = sigmoid_pwl(db, db.constant(z));
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_NEAR(plain[i], sigma_ref(z[i]), 0x1p-15) << z[i];
    EXPECT_DOUBLE_EQ(dbl[i], sigma_ref(z[i])) << z[i];
  }
}

TEST(Sigmoid, ContinuousAtKnees) {
  PlainBackend pb;
  const double u = 0x1p-16;
  std::vector<double> z = {-2 - u, -2, -2 + u, 2 - u, 2, 2 + u};
  auto s = PlainBackend::decode(sigmoid_pwl(pb, pb.constant(z)));
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_LE(s[2], u);
  EXPECT_GE(s[3], 1 - u);
  EXPECT_EQ(s[4], 1.0);
  EXPECT_EQ(s[5], 1.0);
}

TEST(Train, SeparableSetReachesFullAccuracy) {
  PlainBackend pb;
  auto d = separable8();
  auto w = train_on(pb, d, 7, {.epochs = 50, .batch = 4, .lr = 0.5});
  EXPECT_EQ(accuracy(pb, w, d), 1.0);
  // The float reference agrees on every label.
  DoubleBackend db;
  auto wd = train_on(db, d, 7, {.epochs = 50, .batch = 4, .lr = 0.5});
  EXPECT_EQ(accuracy(db, wd, d), 1.0);
}

TEST(Train, ZeroEpochsGivesZeroModel) {
  PlainBackend pb;
  auto w = train_on(pb, separable8(), 1, {.epochs = 0, .batch = 4, .lr = 0.5});
  EXPECT_EQ(w, std::vector<std::int64_t>(3, 0));
}

TEST(Train, EmptyDatasetRejected) {
  PlainBackend pb;
  EXPECT_THROW(train(pb, pb.zeros(0), pb.zeros(0), 0, 2, 1, {}), std::invalid_argument);
}

TEST(Train, EpochOrderIsPermutationDrivenByJ) {
  auto a = epoch_order(11, 0, 16);
  auto b = epoch_order(11, 1, 16);
  auto c = epoch_order(12, 0, 16);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a, epoch_order(11, 0, 16));
}

TEST(Train, OrderingSeedChangesTrajectory) {
  PlainBackend pb;
  auto d = adult_like(24, 3);
  TrainConfig cfg{.epochs = 1, .batch = 8, .lr = 0.5};
  EXPECT_NE(train_on(pb, d, 1, cfg), train_on(pb, d, 2, cfg));
}

TEST(Train, MpcMatchesPlaintextBitForBit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = adult_like(12, 100 + seed);
    TrainConfig cfg{.epochs = 2, .batch = 6, .lr = 0.5};
    const std::uint64_t J = derive_seed(seed, 77);
    PlainBackend pb;
    auto w_plain = train_on(pb, d, J, cfg);
    mpc::Engine e(FM61(), {.parties = 3, .seed = seed});
    MpcBackend mb(e);
    auto w_mpc = mb.open_int(train_on(mb, d, J, cfg));
    ASSERT_EQ(w_mpc, w_plain) << "seed " << seed;
    auto p_plain = predict(pb, w_plain, pb.constant(d.x), d.rows, d.width);
    auto p_mpc = predict(mb, mb.constant_int(w_plain), mb.constant(d.x), d.rows, d.width);
    EXPECT_EQ(mb.open_int(p_mpc.score), p_plain.score);
    EXPECT_EQ(mb.open_int(p_mpc.label), p_plain.label);
  }
}

TEST(Train, GradientMatchesCentralDifference) {
  PlainBackend pb;
  auto d = adult_like(16, 9);
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(d.width + 1);
    for (auto& v : w) v = 0.5 * standard_normal(rng);
    auto wq = PlainBackend::decode(pb.constant(w));
    // Double loss: mean of F(z) - y z at the quantized weights.
    auto loss = [&](const std::vector<double>& ww) {
      double s = 0;
      for (std::size_t i = 0; i < d.rows; ++i) {
        double z = ww.back();
        for (std::size_t j = 0; j < d.width; ++j) z += ww[j] * d.x[i * d.width + j];
        s += F_ref(z) - static_cast<double>(d.y[i]) * z;
      }
      return s / static_cast<double>(d.rows);
    };
    auto Xb = with_bias(pb, pb.constant(d.x), d.rows, d.width);
    auto g = PlainBackend::decode(gradient_sum(pb, pb.constant(wq), Xb, pb.constant(d.labels_real()), d.rows));
    const double h = 1e-5;
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto up = wq, dn = wq;
      up[j] += h;
      dn[j] -= h;
      double fd = (loss(up) - loss(dn)) / (2 * h);
      EXPECT_NEAR(g[j] / static_cast<double>(d.rows), fd, 0x1p-12) << "trial " << trial << " coord " << j;
    }
  }
}

TEST(Train, AdultToyLearnsAboveBaseRate) {
  PlainBackend pb;
  auto d = adult_like(kAdultToyRows, kAdultToySeed);
  auto w = train_on(pb, d, 5, {.epochs = 30, .batch = 8, .lr = 0.5});
  std::size_t pos = 0;
  for (auto y : d.y) pos += y;
  double base = std::max(pos, d.rows - pos) / static_cast<double>(d.rows);
  EXPECT_GT(accuracy(pb, w, d), base);
}

TEST(Predict, ZeroWeightsScoreHalf) {
  PlainBackend pb;
  auto d = separable8();
  auto p = predict(pb, pb.zeros(3), pb.constant(d.x), d.rows, d.width);
  for (auto s : PlainBackend::decode(p.score)) EXPECT_EQ(s, 0.5);
  for (auto l : p.label) EXPECT_EQ(l, 1);
}

TEST(Predict, LabelFlipsAcrossBoundary) {
  PlainBackend pb;
  std::vector<double> w = {1.0, -0.5};
  auto p = predict(pb, pb.constant(w), pb.constant(std::vector<double>{0.4, 0.6}), 2, 1);
  EXPECT_EQ(p.label, (std::vector<std::int64_t>{0, 1}));
}

TEST(Predict, WidthMismatchRejected) {
  PlainBackend pb;
  EXPECT_THROW(predict(pb, pb.zeros(4), pb.zeros(6), 3, 2), WidthMismatch);
  EXPECT_THROW(predict(pb, pb.zeros(3), pb.zeros(5), 3, 2), WidthMismatch);
}

TEST(Plain, OverflowDetected) {
  PlainBackend pb;
  auto big = pb.constant_int(std::vector<std::int64_t>{INT64_MAX / 2});
  EXPECT_THROW(pb.mul_int(big, pb.constant_int(std::vector<std::int64_t>{4})), FixedOverflow);
  EXPECT_THROW(pb.add(big, pb.add(big, big)), FixedOverflow);
}

TEST(Dataset, CsvRoundTrip) {
  auto d = adult_like(10, 1);
  std::stringstream ss;
  write_csv(ss, d);
  auto back = read_csv(ss);
  EXPECT_EQ(back.columns, d.columns);
  EXPECT_EQ(back.rows, d.rows);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
}

TEST(Dataset, CsvErrors) {
  std::stringstream empty;
  EXPECT_THROW(read_csv(empty), CsvError);
  std::stringstream ragged("a,b,label\n1,2,0\n1,0\n");
  EXPECT_THROW(read_csv(ragged), CsvError);
  std::stringstream bad_label("a,label\n0.5,2\n");
  EXPECT_THROW(read_csv(bad_label), CsvError);
  std::stringstream bad_num("a,label\nx,1\n");
  EXPECT_THROW(read_csv(bad_num), CsvError);
}

TEST(Dataset, BundledTableMatchesGenerator) {
  auto file = load_csv(ARC_DATA_DIR "/adult_toy.csv");
  auto gen = adult_like(kAdultToyRows, kAdultToySeed);
  EXPECT_EQ(file.columns, gen.columns);
  EXPECT_EQ(file.x, gen.x);
  EXPECT_EQ(file.y, gen.y);
  for (double v : file.x) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Dataset, SliceAndConcat) {
  auto d = adult_like(9, 2);
  std::vector<Dataset> parts = {d.slice(0, 4), d.slice(4, 5)};
  auto back = Dataset::concat(parts);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_THROW(d.slice(5, 5), std::out_of_range);
}
