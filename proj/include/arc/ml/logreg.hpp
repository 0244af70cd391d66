#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "arc/algebra/rng.hpp"
#include "arc/ml/backend.hpp"

namespace arc::ml {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch = 8;
  double lr = 0.5;
};

struct WidthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Row order for one epoch: a permutation drawn from the ordering seed J.
inline std::vector<std::size_t> epoch_order(std::uint64_t J, std::size_t epoch, std::size_t rows) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(J, epoch));
  shuffle(std::span<std::size_t>(order), rng);
  return order;
}

// Three-segment sigmoid: 0 below -2, 0.5 + z/4 in between, 1 above 2.
template <class B>
typename B::Vec sigmoid_pwl(B& be, const typename B::Vec& z) {
  const std::size_t n = be.size(z);
  auto mid = be.add_public(be.mul_public(z, filled(n, 0.25)), filled(n, 0.5));
  auto lo = be.ltz(be.add_public(z, filled(n, 2.0)));                 // z < -2
  auto hi = be.ltz(be.sub(be.constant(filled(n, 2.0)), z));          // z > 2
  auto one_minus_mid = be.sub(be.constant(filled(n, 1.0)), mid);
  // Both bit products in one batch.
  auto prod = be.mul_int(be.concat(hi, lo), be.concat(one_minus_mid, mid));
  std::vector<std::size_t> first(n), second(n);
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::iota(second.begin(), second.end(), n);
  return be.sub(be.add(mid, be.gather(prod, first)), be.gather(prod, second));
}

// Feature rows with a trailing constant 1 per row (row-major, width + 1 columns).
template <class B>
typename B::Vec with_bias(B& be, const typename B::Vec& X, std::size_t rows, std::size_t width) {
  if (be.size(X) != rows * width) throw WidthMismatch("feature matrix size does not match rows x width");
  auto all = be.concat(X, be.constant(filled(rows, 1.0)));
  std::vector<std::size_t> idx;
  idx.reserve(rows * (width + 1));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) idx.push_back(i * width + j);
    idx.push_back(rows * width + i);
  }
  return be.gather(all, idx);
}

// w repeated once per row.
template <class B>
typename B::Vec tile_rows(B& be, const typename B::Vec& w, std::size_t rows) {
  const std::size_t cols = be.size(w);
  std::vector<std::size_t> idx;
  idx.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) idx.push_back(j);
  return be.gather(w, idx);
}

// Pre-activation z = Xb w for each row of the biased matrix Xb.
template <class B>
typename B::Vec logits(B& be, const typename B::Vec& w, const typename B::Vec& Xb, std::size_t rows) {
  const std::size_t cols = be.size(w);
  if (be.size(Xb) != rows * cols) throw WidthMismatch("model width does not match feature width");
  return be.dot_groups(Xb, tile_rows(be, w, rows), cols);
}

// Sum over the batch of (sigma(z_i) - y_i) * x_i, one entry per weight.
template <class B>
typename B::Vec gradient_sum(B& be, const typename B::Vec& w, const typename B::Vec& Xb, const typename B::Vec& y,
                             std::size_t rows) {
  const std::size_t cols = be.size(w);
  auto err = be.sub(sigmoid_pwl(be, logits(be, w, Xb, rows)), y);
  // Column-major view so each weight's terms form one group.
  std::vector<std::size_t> t(rows * cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) t[j * rows + i] = i * cols + j;
  return be.dot_groups(be.gather(be.repeat_each(err, cols), t), be.gather(Xb, t), rows);
}

// Mini-batch gradient descent from zero weights. X is rows x width row-major,
// y holds real 0/1 labels. Returns width + 1 weights, bias last.
template <class B>
typename B::Vec train(B& be, const typename B::Vec& X, const typename B::Vec& y, std::size_t rows, std::size_t width,
                      std::uint64_t J, const TrainConfig& cfg) {
  if (rows == 0) throw std::invalid_argument("train: empty dataset");
  if (be.size(y) != rows) throw WidthMismatch("label count does not match rows");
  if (cfg.batch == 0) throw std::invalid_argument("train: batch size must be positive");
  const std::size_t cols = width + 1;
  auto Xb = with_bias(be, X, rows, width);
  auto w = be.zeros(cols);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto order = epoch_order(J, epoch, rows);
    for (std::size_t lo = 0; lo < rows; lo += cfg.batch) {
      const std::size_t n = std::min(cfg.batch, rows - lo);
      std::vector<std::size_t> pick(order.begin() + lo, order.begin() + lo + n), cells;
      cells.reserve(n * cols);
      for (auto r : pick)
        for (std::size_t j = 0; j < cols; ++j) cells.push_back(r * cols + j);
      auto g = gradient_sum(be, w, be.gather(Xb, cells), be.gather(y, pick), n);
      w = be.sub(w, be.mul_public(g, filled(cols, cfg.lr / static_cast<double>(n))));
    }
  }
  return w;
}

template <class B>
struct Prediction {
  typename B::Vec score;  // real in [0, 1]
  typename B::Vec label;  // int 0/1
};

template <class B>
Prediction<B> predict(B& be, const typename B::Vec& w, const typename B::Vec& X, std::size_t rows, std::size_t width) {
  if (be.size(w) != width + 1) throw WidthMismatch("model width does not match feature width");
  auto score = sigmoid_pwl(be, logits(be, w, with_bias(be, X, rows, width), rows));
  auto below = be.ltz(be.add_public(score, filled(rows, -0.5)));
  return {score, be.sub(be.constant_int(filled_int(rows, 1)), below)};
}

}  // namespace arc::ml
