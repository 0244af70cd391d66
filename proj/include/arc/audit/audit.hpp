#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <span>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "arc/ml/backend.hpp"
#include "arc/ml/logreg.hpp"

namespace arc::audit {

using ml::filled;
using ml::filled_int;

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotPositiveDefinite : InvalidParams {
  using InvalidParams::InvalidParams;
};
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- statistics

double std_normal_cdf(double x);

// P[X >= k] for X ~ Bin(n, tau), summed exactly in long double.
long double binomial_upper_tail(std::size_t n, std::size_t k, long double tau);

// Smallest count c with P[X >= c] <= alpha, or n + 1 when no count certifies.
// The tail is decreasing in c, so "count >= c" is the same decision as
// "p-value <= alpha", and only that bit needs to leave the computation.
std::size_t certify_threshold(std::size_t n, long double tau, double alpha);

// ---------------------------------------------------------------- parameters

struct RobustnessParams {
  double R = 0.5;
  double sigma = 0.25;
  std::size_t n = 32;
  double alpha = 0.05;

  void validate() const;
  double tau() const { return std_normal_cdf(R / sigma); }
};

struct FairnessParams {
  double L = 1.0;
  std::vector<double> theta;  // width x width, row-major, symmetric positive definite
  std::size_t n = 32;
  double alpha = 0.05;

  void validate(std::size_t width) const;
  double tau() const;
};

struct CamelParams {
  std::size_t epochs = 3;
  double tau = 3.5;
  double lr = 0.5;
};

// Public perturbations, n rows of `width` entries, drawn from the public coin.
std::vector<double> isotropic_noise(std::size_t n, std::size_t width, double sigma, std::uint64_t coin);
// Rows distributed as N(0, theta^-1) via the Cholesky factor of theta^-1.
std::vector<double> fairness_noise(std::size_t n, std::size_t width, std::span<const double> theta,
                                   std::uint64_t coin);

// ---------------------------------------------------------------- shared helpers

// Equality of two 0/1 int vectors: 1 - a - b + 2ab.
template <class B>
typename B::Vec bit_eq(B& be, const typename B::Vec& a, const typename B::Vec& b) {
  const std::size_t n = be.size(a);
  auto ab = be.mul_int(a, b);
  auto s = be.sub(be.constant_int(filled_int(n, 1)), be.add(a, b));
  return be.add(s, be.scale_int(ab, filled_int(n, 2)));
}

// Batcher odd-even merge sort comparators for n = 2^k, grouped into layers of
// disjoint pairs (lo, hi).
using Layer = std::vector<std::pair<std::size_t, std::size_t>>;
std::vector<Layer> sorting_network(std::size_t n);

// Sorts ascending by key with a data-independent comparator schedule. Each
// payload is permuted alongside. Keys must be pairwise distinct for the
// permutation to be determined by the keys alone.
template <class B>
void oblivious_sort(B& be, typename B::Vec& keys, std::vector<typename B::Vec>& payloads) {
  const std::size_t n = be.size(keys);
  if (n < 2) return;
  const std::size_t m = std::bit_ceil(n);
  // Padding sorts last: larger than any key the audits produce.
  const std::int64_t pad = std::int64_t{1} << 60;
  if (m > n) {
    keys = be.concat(keys, be.constant_int(filled_int(m - n, pad)));
    for (auto& p : payloads) p = be.concat(p, be.zeros(m - n));
  }
  for (const auto& layer : sorting_network(m)) {
    const std::size_t L = layer.size();
    std::vector<std::size_t> ia, ib;
    for (auto [a, b] : layer) {
      ia.push_back(a);
      ib.push_back(b);
    }
    std::vector<typename B::Vec*> arrays{&keys};
    for (auto& p : payloads) arrays.push_back(&p);
    std::vector<typename B::Vec> lo, diff;
    for (auto* q : arrays) {
      lo.push_back(be.gather(*q, ia));
      diff.push_back(be.sub(be.gather(*q, ib), lo.back()));
    }
    auto swap = be.ltz(diff[0]);  // 1 when the pair is out of order
    auto all = diff[0];
    for (std::size_t s = 1; s < diff.size(); ++s) all = be.concat(all, diff[s]);
    std::vector<std::size_t> rep(be.size(all));
    for (std::size_t t = 0; t < rep.size(); ++t) rep[t] = t % L;
    auto delta = be.mul_int(be.gather(swap, rep), all);
    std::vector<std::size_t> place(m);
    for (std::size_t t = 0; t < m; ++t) place[t] = t;
    for (std::size_t t = 0; t < L; ++t) {
      place[ia[t]] = m + t;
      place[ib[t]] = m + L + t;
    }
    for (std::size_t s = 0; s < arrays.size(); ++s) {
      std::vector<std::size_t> blk(L);
      for (std::size_t t = 0; t < L; ++t) blk[t] = s * L + t;
      auto d = be.gather(delta, blk);
      auto new_lo = be.add(lo[s], d);
      auto new_hi = be.sub(be.add(lo[s], diff[s]), d);
      *arrays[s] = be.gather(be.concat(be.concat(*arrays[s], new_lo), new_hi), place);
    }
  }
  if (m > n) {
    std::vector<std::size_t> head(n);
    for (std::size_t t = 0; t < n; ++t) head[t] = t;
    keys = be.gather(keys, head);
    for (auto& p : payloads) p = be.gather(p, head);
  }
}

template <class B>
typename B::Vec sort_values(B& be, typename B::Vec v) {
  std::vector<typename B::Vec> none;
  oblivious_sort(be, v, none);
  return v;
}

// Median of a real vector: middle element, or the mean of the two middle ones.
template <class B>
typename B::Vec median(B& be, const typename B::Vec& v) {
  const std::size_t n = be.size(v);
  if (n == 0) throw InvalidParams("median of empty vector");
  auto s = sort_values(be, v);
  if (n % 2) return be.gather(s, std::vector<std::size_t>{n / 2});
  auto two = be.gather(s, std::vector<std::size_t>{n / 2 - 1, n / 2});
  return be.mul_public(be.sum_groups(two, 2), filled(1, 0.5));
}

template <class B>
typename B::Vec abs_value(B& be, const typename B::Vec& v) {
  auto neg = be.mul_int(be.ltz(v), v);
  return be.sub(v, be.scale_int(neg, filled_int(be.size(v), 2)));
}

// Shared training data of one party; labels are 0/1 ints.
template <class B>
struct PartyData {
  typename B::Vec X;
  typename B::Vec y;
  std::size_t rows = 0;
};

template <class B>
PartyData<B> union_of(B& be, const std::vector<PartyData<B>>& parts) {
  if (parts.empty()) throw InvalidParams("no party data");
  PartyData<B> u = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    u.X = be.concat(u.X, parts[i].X);
    u.y = be.concat(u.y, parts[i].y);
    u.rows += parts[i].rows;
  }
  return u;
}

// ---------------------------------------------------------------- robustness

template <class B>
struct Certificate {
  typename B::Vec certified;  // int bit
  typename B::Vec count;      // int, kept shared
  std::size_t threshold = 0;
  double tau = 0;
};

// Counts model labels equal to y over the perturbed copies x + noise_k.
template <class B>
typename B::Vec count_matches(B& be, const typename B::Vec& w, const typename B::Vec& x, const typename B::Vec& y,
                              std::size_t width, std::span<const double> noise) {
  const std::size_t n = noise.size() / width;
  auto pts = be.add_public(ml::tile_rows(be, x, n), noise);
  auto labels = ml::predict(be, w, pts, n, width).label;
  return be.sum_groups(bit_eq(be, labels, ml::tile_rows(be, y, n)), n);
}

template <class B>
Certificate<B> certify_with_noise(B& be, const typename B::Vec& w, const typename B::Vec& x, const typename B::Vec& y,
                                  std::size_t width, std::span<const double> noise, double tau, double alpha) {
  if (be.size(x) != width || noise.size() % width) throw ml::WidthMismatch("query width mismatch");
  const std::size_t n = noise.size() / width;
  Certificate<B> c;
  c.tau = tau;
  c.threshold = certify_threshold(n, tau, alpha);
  c.count = count_matches(be, w, x, y, width, noise);
  auto below = be.ltz(be.add_public_int(c.count, filled_int(1, -static_cast<std::int64_t>(c.threshold))));
  c.certified = be.sub(be.constant_int(filled_int(1, 1)), below);
  return c;
}

template <class B>
Certificate<B> certify_rs(B& be, const typename B::Vec& w, const typename B::Vec& x, const typename B::Vec& y,
                          std::size_t width, const RobustnessParams& p, std::uint64_t coin) {
  p.validate();
  auto noise = isotropic_noise(p.n, width, p.sigma, coin);
  return certify_with_noise(be, w, x, y, width, noise, p.tau(), p.alpha);
}

template <class B>
Certificate<B> certify_fair(B& be, const typename B::Vec& w, const typename B::Vec& x, const typename B::Vec& y,
                            std::size_t width, const FairnessParams& p, std::uint64_t coin) {
  p.validate(width);
  auto noise = fairness_noise(p.n, width, p.theta, coin);
  return certify_with_noise(be, w, x, y, width, noise, p.tau(), p.alpha);
}

// ---------------------------------------------------------------- KNN-Shapley

// Single-pass recursion over label-match indicators Z in ascending distance
// order: s_N = Z_N min(K, N) / (K N), s_i = s_{i+1} + (Z_i - Z_{i+1}) min(K, i) / (K i).
// The base case is Z_N / N whenever N >= K; the general form keeps it exact
// for datasets smaller than K. T is any field-like type.
template <class T>
std::vector<T> knn_recursion(std::span<const T> Z, std::size_t K) {
  const std::size_t N = Z.size();
  if (N == 0) throw InvalidParams("knn: empty dataset");
  if (K == 0) throw InvalidParams("knn: K must be positive");
  std::vector<T> s(N);
  const long n = static_cast<long>(N), kk = static_cast<long>(K);
  s[N - 1] = Z[N - 1] * T(std::min(kk, n)) / T(kk * n);
  for (std::size_t i = N - 1; i-- > 0;) {
    const long rank = static_cast<long>(i + 1);
    const long k = static_cast<long>(K);
    s[i] = s[i + 1] + (Z[i] - Z[i + 1]) * T(std::min(k, rank)) / T(k * rank);
  }
  return s;
}

// The recursion as an N x N public matrix (row-major) acting on Z, computed
// with exact rationals and rounded once.
std::vector<double> knn_coefficients(std::size_t N, std::size_t K);

// Shapley value of each training row under the K-NN utility on (x, y).
// Distances are squared L2 in feature space; ties go to the lower index.
// Returns reals aligned to the input row order.
template <class B>
typename B::Vec knn_shapley(B& be, const typename B::Vec& x, const typename B::Vec& y, const PartyData<B>& data,
                            std::size_t width, std::size_t K) {
  const std::size_t N = data.rows;
  if (N == 0) throw InvalidParams("knn: empty dataset");
  if (K == 0) throw InvalidParams("knn: K must be positive");
  if (be.size(x) != width || be.size(data.X) != N * width) throw ml::WidthMismatch("knn: width mismatch");
  auto diff = be.sub(data.X, ml::tile_rows(be, x, N));
  auto dist = be.dot_groups(diff, diff, width);
  const unsigned shift = static_cast<unsigned>(std::bit_width(N));
  std::vector<std::int64_t> index(N);
  for (std::size_t i = 0; i < N; ++i) index[i] = static_cast<std::int64_t>(i);
  typename B::Vec keys;
  if constexpr (std::is_same_v<B, ml::DoubleBackend>) {
    keys = dist;
    for (std::size_t i = 0; i < N; ++i)
      keys[i] = std::ldexp(static_cast<double>(fx_encode(dist[i])), static_cast<int>(shift)) + static_cast<double>(i);
  } else {
    keys = be.add_public_int(be.scale_int(dist, filled_int(N, std::int64_t{1} << shift)), index);
  }
  auto Z = bit_eq(be, data.y, ml::tile_rows(be, y, N));
  std::vector<typename B::Vec> payload{Z, be.constant_int(index)};
  oblivious_sort(be, keys, payload);
  auto values = be.matvec_public(knn_coefficients(N, K), be.to_real(payload[0]));
  std::vector<typename B::Vec> back{values};
  oblivious_sort(be, payload[1], back);
  return back[0];
}

// ---------------------------------------------------------------- camel

// Piecewise-linear natural log on [2^-8, 1] with knots at powers of two;
// inputs below 2^-8 are clipped.
template <class B>
typename B::Vec pwl_ln(B& be, const typename B::Vec& p) {
  constexpr int kKnots = 8;
  const std::size_t n = be.size(p);
  const double k0 = std::ldexp(1.0, -kKnots);
  auto below = be.ltz(be.add_public(p, filled(n, -k0)));
  auto pc = be.add(p, be.mul_int(below, be.sub(be.constant(filled(n, k0)), p)));
  // Hinges at k_1..k_7 add the slope change ln2/k_j - ln2/k_{j-1}.
  std::vector<double> offs, dslope;
  for (int j = 1; j < kKnots; ++j) {
    const double kj = std::ldexp(1.0, j - kKnots);
    offs.push_back(-kj);
    dslope.push_back(std::log(2.0) / kj - std::log(2.0) / (kj / 2));
  }
  const std::size_t h = offs.size();
  std::vector<double> off_all, slope_all;
  for (std::size_t i = 0; i < n; ++i) {
    off_all.insert(off_all.end(), offs.begin(), offs.end());
    slope_all.insert(slope_all.end(), dslope.begin(), dslope.end());
  }
  auto v = be.add_public(be.repeat_each(pc, h), off_all);
  auto relu = be.sub(v, be.mul_int(be.ltz(v), v));
  auto hinge = be.sum_groups(be.mul_public(relu, slope_all), h);
  auto base = be.mul_public(be.add_public(pc, filled(n, -k0)), filled(n, std::log(2.0) / k0));
  return be.add_public(be.add(base, hinge), filled(n, std::log(k0)));
}

// Cross-entropy of each model in `ws` (concatenated, width + 1 each) on (x, y).
template <class B>
typename B::Vec cross_entropy(B& be, const typename B::Vec& ws, const typename B::Vec& x, const typename B::Vec& y,
                              std::size_t width) {
  const std::size_t cols = width + 1;
  const std::size_t m = be.size(ws) / cols;
  auto xb = ml::with_bias(be, x, 1, width);
  auto z = be.dot_groups(ws, ml::tile_rows(be, xb, m), cols);
  auto s = ml::sigmoid_pwl(be, z);
  auto yr = ml::tile_rows(be, y, m);
  // Probability of the true label: 1 - y - s + 2 y s.
  auto ys = be.mul_int(yr, s);
  auto p = be.sub(be.sub(be.constant(filled(m, 1.0)), be.to_real(yr)), s);
  p = be.add(p, be.scale_int(ys, filled_int(m, 2)));
  return be.sub(be.zeros(m), pwl_ln(be, p));
}

// Per party: fine-tune a copy of the model with that party's labels replaced
// by 0.5, then score the query. Returns one loss per party.
template <class B>
typename B::Vec camel_scores(B& be, const typename B::Vec& w, const typename B::Vec& x, const typename B::Vec& y,
                             const std::vector<PartyData<B>>& parts, std::size_t width, const CamelParams& cp) {
  auto all = union_of(be, parts);
  const std::size_t cols = width + 1;
  auto Xb = ml::with_bias(be, all.X, all.rows, width);
  std::vector<typename B::Vec> labels;
  for (const auto& p : parts) labels.push_back(be.to_real(p.y));
  typename B::Vec models;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    typename B::Vec yi;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      auto seg = j == i ? be.constant(filled(parts[j].rows, 0.5)) : labels[j];
      yi = j == 0 ? seg : be.concat(yi, seg);
    }
    auto wi = w;
    for (std::size_t e = 0; e < cp.epochs; ++e) {
      auto g = ml::gradient_sum(be, wi, Xb, yi, all.rows);
      wi = be.sub(wi, be.mul_public(g, filled(cols, cp.lr / static_cast<double>(all.rows))));
    }
    models = i == 0 ? wi : be.concat(models, wi);
  }
  return cross_entropy(be, models, x, y, width);
}

// Flags entries with |s_i - median| > tau * (MAD + eps), eps one fixed-point unit.
template <class B>
typename B::Vec mad_outliers(B& be, const typename B::Vec& scores, double tau) {
  const std::size_t n = be.size(scores);
  auto m = median(be, scores);
  auto dev = abs_value(be, be.sub(scores, ml::tile_rows(be, m, n)));
  auto mad = be.add_public(median(be, dev), filled(1, std::ldexp(1.0, -static_cast<int>(kFracBits))));
  auto bound = be.mul_public(mad, filled(1, tau));
  return be.ltz(be.sub(ml::tile_rows(be, bound, n), dev));
}

template <class B>
typename B::Vec camel_attribution(B& be, const typename B::Vec& w, const typename B::Vec& x, const typename B::Vec& y,
                                  const std::vector<PartyData<B>>& parts, std::size_t width, const CamelParams& cp) {
  return mad_outliers(be, camel_scores(be, w, x, y, parts, width, cp), cp.tau);
}

// ---------------------------------------------------------------- KernelSHAP

// Coalition masks, `count` rows of `width` 0/1 entries.
struct Coalitions {
  std::size_t width = 0;
  std::size_t count = 0;
  std::vector<std::uint8_t> z;

  bool in(std::size_t k, std::size_t j) const { return z[k * width + j] != 0; }
};

// Every proper nonempty subset.
Coalitions all_coalitions(std::size_t width);
// Uniform draws from the proper nonempty subsets, using the public coin.
Coalitions sample_coalitions(std::size_t width, std::size_t count, std::uint64_t coin);
double shapley_kernel_weight(std::size_t width, std::size_t size);

// Public linear map (row-major, (width + 1) x (count + 2)) from
// (v_empty, v_full, yhat_1..yhat_count) to phi_0..phi_width. phi_0 = v_empty
// and sum phi = v_full hold exactly; the rest is the kernel-weighted least
// squares fit with a ridge term.
std::vector<double> kernel_shap_map(const Coalitions& c, double ridge = 1e-9);

// Float path over any model.
std::vector<double> kernel_shap_fn(const std::function<double(std::span<const double>)>& model,
                                   std::span<const double> x, std::span<const double> X, std::size_t rows,
                                   const Coalitions& c);

// Backend path over the logistic model's score.
template <class B>
typename B::Vec kernel_shap(B& be, const typename B::Vec& w, const typename B::Vec& x, const PartyData<B>& data,
                            std::size_t width, const Coalitions& c) {
  if (c.width != width) throw ml::WidthMismatch("coalition width mismatch");
  const std::size_t N = data.rows;
  if (N == 0) throw InvalidParams("kernel_shap: empty dataset");
  // Points: dataset rows, the query, then each coalition over every row.
  auto pool = be.concat(x, data.X);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < N * width; ++i) idx.push_back(width + i);
  for (std::size_t j = 0; j < width; ++j) idx.push_back(j);
  for (std::size_t k = 0; k < c.count; ++k)
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t j = 0; j < width; ++j) idx.push_back(c.in(k, j) ? j : width + r * width + j);
  const std::size_t pts = idx.size() / width;
  auto score = ml::predict(be, w, be.gather(pool, idx), pts, width).score;
  // Averaging over rows folded into the public map.
  auto A = kernel_shap_map(c);
  const std::size_t in = c.count + 2;
  std::vector<double> M((width + 1) * pts, 0.0);
  for (std::size_t o = 0; o <= width; ++o) {
    for (std::size_t r = 0; r < N; ++r) M[o * pts + r] = A[o * in] / static_cast<double>(N);
    M[o * pts + N] = A[o * in + 1];
    for (std::size_t k = 0; k < c.count; ++k)
      for (std::size_t r = 0; r < N; ++r) M[o * pts + N + 1 + k * N + r] = A[o * in + 2 + k] / static_cast<double>(N);
  }
  return be.matvec_public(M, score);
}

// ---------------------------------------------------------------- dispatch

enum class Function { CertifyRS, CertifyFair, KnnShapley, Camel, KernelShap };

const char* to_string(Function f);
Function function_from_string(std::string_view s);

// Audit function plus its public parameters, as carried in an audit request:
//   {"function": "certify_rs", "R": .., "sigma": .., "n": .., "alpha": ..}
//   {"function": "certify_fair", "L": .., "theta": [[..]], "n": .., "alpha": ..}
//   {"function": "knn_shapley", "K": ..}
//   {"function": "camel", "epochs": .., "tau": .., "lr": ..}
//   {"function": "kernel_shap", "samples": ..}   (0 = every coalition)
struct AuditSpec {
  Function function = Function::CertifyRS;
  RobustnessParams rs;
  FairnessParams fair;
  std::size_t K = 3;
  CamelParams camel;
  std::size_t samples = 0;

  static AuditSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

template <class B>
struct AuditValue {
  typename B::Vec value;
  bool is_int = false;  // decision bits and flags are ints, Shapley values reals
};

// Runs the selected function on shared inputs. Public randomness derives from `coin`.
template <class B>
AuditValue<B> run_function(B& be, const AuditSpec& spec, const typename B::Vec& w, const typename B::Vec& x,
                           const typename B::Vec& y, const std::vector<PartyData<B>>& parts, std::size_t width,
                           std::uint64_t coin) {
  switch (spec.function) {
    case Function::CertifyRS:
      return {certify_rs(be, w, x, y, width, spec.rs, coin).certified, true};
    case Function::CertifyFair:
      return {certify_fair(be, w, x, y, width, spec.fair, coin).certified, true};
    case Function::KnnShapley:
      return {knn_shapley(be, x, y, union_of(be, parts), width, spec.K), false};
    case Function::Camel:
      return {camel_attribution(be, w, x, y, parts, width, spec.camel), true};
    case Function::KernelShap: {
      auto c = spec.samples == 0 ? all_coalitions(width) : sample_coalitions(width, spec.samples, coin);
      return {kernel_shap(be, w, x, union_of(be, parts), width, c), false};
    }
  }
  throw InvalidParams("unknown audit function");
}

}  // namespace arc::audit
