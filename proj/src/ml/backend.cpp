#include "arc/ml/backend.hpp"

#include <stdexcept>

#include "arc/mpc/protocols.hpp"

namespace arc::ml {
namespace {

template <class V>
void same_size(const V& a, const V& b) {
  if (a.size() != b.size()) throw std::invalid_argument("backend: operand length mismatch");
}

std::vector<std::uint64_t> as_ring(std::span<const std::int64_t> x) { return {x.begin(), x.end()}; }

std::vector<std::int64_t> as_signed(std::span<const std::uint64_t> x) { return {x.begin(), x.end()}; }

std::vector<std::int64_t> encode_all(std::span<const double> x) {
  std::vector<std::int64_t> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(fx_encode(v));
  return out;
}

}  // namespace

// ---- PlainBackend ----

PlainBackend::Vec PlainBackend::constant(std::span<const double> x) const { return encode_all(x); }

PlainBackend::Vec PlainBackend::add(const Vec& a, const Vec& b) const {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = fx_add(a[i], b[i]);
  return r;
}

PlainBackend::Vec PlainBackend::sub(const Vec& a, const Vec& b) const {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (__builtin_sub_overflow(a[i], b[i], &r[i])) throw FixedOverflow("fixed-point difference overflows 64 bits");
  }
  return r;
}

PlainBackend::Vec PlainBackend::mul(const Vec& a, const Vec& b) {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = fx_mul_trunc(a[i], b[i]);
  return r;
}

PlainBackend::Vec PlainBackend::mul_int(const Vec& a, const Vec& b) {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = fx_mul_raw(a[i], b[i]);
  return r;
}

PlainBackend::Vec PlainBackend::mul_public(const Vec& a, std::span<const double> c) { return mul(a, constant(c)); }

PlainBackend::Vec PlainBackend::scale_int(const Vec& a, std::span<const std::int64_t> c) const {
  if (a.size() != c.size()) throw std::invalid_argument("backend: operand length mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = fx_mul_raw(a[i], c[i]);
  return r;
}

PlainBackend::Vec PlainBackend::dot_groups(const Vec& a, const Vec& b, std::size_t width) {
  Vec raw = mul_int(a, b);
  Vec s = sum_groups(raw, width);
  for (auto& v : s) v = fx_trunc(v);
  return s;
}

PlainBackend::Vec PlainBackend::matvec_public(std::span<const double> A, const Vec& v) {
  const std::size_t n = v.size();
  if (n == 0 || A.size() % n) throw std::invalid_argument("matvec_public: matrix shape mismatch");
  Vec r(A.size() / n, 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) r[i] = fx_add(r[i], fx_mul_raw(fx_encode(A[i * n + j]), v[j]));
    r[i] = fx_trunc(r[i]);
  }
  return r;
}

PlainBackend::Vec PlainBackend::ltz(const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] < 0;
  return r;
}

PlainBackend::Vec PlainBackend::gather(const Vec& a, std::span<const std::size_t> idx) const {
  Vec r;
  r.reserve(idx.size());
  for (auto i : idx) r.push_back(a.at(i));
  return r;
}

PlainBackend::Vec PlainBackend::concat(const Vec& a, const Vec& b) const {
  Vec r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

PlainBackend::Vec PlainBackend::sum_groups(const Vec& a, std::size_t width) const {
  if (width == 0 || a.size() % width) throw std::invalid_argument("sum_groups: width does not divide size");
  Vec r(a.size() / width, 0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i / width] = fx_add(r[i / width], a[i]);
  return r;
}

PlainBackend::Vec PlainBackend::repeat_each(const Vec& a, std::size_t times) const {
  Vec r;
  r.reserve(a.size() * times);
  for (auto v : a) r.insert(r.end(), times, v);
  return r;
}

std::vector<double> PlainBackend::decode(const Vec& a) {
  std::vector<double> r;
  r.reserve(a.size());
  for (auto v : a) r.push_back(fx_decode(v));
  return r;
}

// ---- MpcBackend ----

MpcBackend::Vec MpcBackend::input(std::optional<std::size_t> owner, std::span<const double> x) {
  auto raw = encode_all(x);
  return e_->input_ring(owner, as_ring(raw));
}

MpcBackend::Vec MpcBackend::input_int(std::optional<std::size_t> owner, std::span<const std::int64_t> x) {
  return e_->input_ring(owner, as_ring(x));
}

MpcBackend::Vec MpcBackend::constant(std::span<const double> x) const {
  return mpc::RShared::constant(e_->parties(), as_ring(encode_all(x)));
}

MpcBackend::Vec MpcBackend::constant_int(std::span<const std::int64_t> x) const {
  return mpc::RShared::constant(e_->parties(), as_ring(x));
}

MpcBackend::Vec MpcBackend::mul(const Vec& a, const Vec& b) { return mpc::mul_trunc(*e_, a, b, kFracBits); }

MpcBackend::Vec MpcBackend::mul_int(const Vec& a, const Vec& b) { return e_->mul_ring(a, b); }

MpcBackend::Vec MpcBackend::mul_public(const Vec& a, std::span<const double> c) {
  return mpc::trunc_exact(*e_, a.scale_each(as_ring(encode_all(c))), kFracBits);
}

MpcBackend::Vec MpcBackend::scale_int(const Vec& a, std::span<const std::int64_t> c) const {
  return a.scale_each(as_ring(c));
}

MpcBackend::Vec MpcBackend::dot_groups(const Vec& a, const Vec& b, std::size_t width) {
  return mpc::trunc_exact(*e_, e_->mul_ring(a, b).sum_groups(width), kFracBits);
}

MpcBackend::Vec MpcBackend::matvec_public(std::span<const double> A, const Vec& v) {
  const std::size_t n = v.size();
  if (n == 0 || A.size() % n) throw std::invalid_argument("matvec_public: matrix shape mismatch");
  std::vector<std::size_t> tile(A.size());
  for (std::size_t i = 0; i < tile.size(); ++i) tile[i] = i % n;
  auto raw = v.gather(tile).scale_each(as_ring(encode_all(A))).sum_groups(n);
  return mpc::trunc_exact(*e_, raw, kFracBits);
}

MpcBackend::Vec MpcBackend::ltz(const Vec& a) { return mpc::ltz(*e_, a); }

MpcBackend::Vec MpcBackend::concat(const Vec& a, const Vec& b) const {
  Vec r = a;
  return r.append(b);
}

std::vector<double> MpcBackend::open_real(const Vec& a) { return PlainBackend::decode(open_int(a)); }

std::vector<std::int64_t> MpcBackend::open_int(const Vec& a) {
  if (recipients_ == 0) return as_signed(e_->open_ring(a));
  return as_signed(e_->open_ring_to(a, recipients_));
}

// ---- DoubleBackend ----

DoubleBackend::Vec DoubleBackend::add(const Vec& a, const Vec& b) const {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

DoubleBackend::Vec DoubleBackend::sub(const Vec& a, const Vec& b) const {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

DoubleBackend::Vec DoubleBackend::mul(const Vec& a, const Vec& b) const {
  same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}

DoubleBackend::Vec DoubleBackend::ltz(const Vec& a) const {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] < 0 ? 1.0 : 0.0;
  return r;
}

DoubleBackend::Vec DoubleBackend::gather(const Vec& a, std::span<const std::size_t> idx) const {
  Vec r;
  r.reserve(idx.size());
  for (auto i : idx) r.push_back(a.at(i));
  return r;
}

DoubleBackend::Vec DoubleBackend::concat(const Vec& a, const Vec& b) const {
  Vec r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

DoubleBackend::Vec DoubleBackend::sum_groups(const Vec& a, std::size_t width) const {
  if (width == 0 || a.size() % width) throw std::invalid_argument("sum_groups: width does not divide size");
  Vec r(a.size() / width, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i / width] += a[i];
  return r;
}

DoubleBackend::Vec DoubleBackend::repeat_each(const Vec& a, std::size_t times) const {
  Vec r;
  r.reserve(a.size() * times);
  for (auto v : a) r.insert(r.end(), times, v);
  return r;
}

DoubleBackend::Vec DoubleBackend::matvec_public(std::span<const double> A, const Vec& v) const {
  const std::size_t n = v.size();
  if (n == 0 || A.size() % n) throw std::invalid_argument("matvec_public: matrix shape mismatch");
  Vec r(A.size() / n, 0.0);
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) r[i] += A[i * n + j] * v[j];
  return r;
}

std::vector<std::int64_t> DoubleBackend::open_int(const Vec& a) const {
  std::vector<std::int64_t> r;
  r.reserve(a.size());
  for (auto v : a) r.push_back(static_cast<std::int64_t>(std::llround(v)));
  return r;
}

}  // namespace arc::ml
