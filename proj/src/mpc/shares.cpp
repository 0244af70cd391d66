#include "arc/mpc/shares.hpp"

namespace arc::mpc {
namespace {

template <class S>
void check_shape(const S& a, const S& b) {
  if (a.parties() != b.parties() || a.size() != b.size()) {
    throw DomainMismatch("shared vectors differ in shape");
  }
}

}  // namespace

// ---- FShared ----

FShared FShared::zeros(const PrimeField& f, std::size_t parties, std::size_t n) {
  FShared r;
  r.f = &f;
  r.s.assign(parties, std::vector<Fe>(n, Fe::zero(f)));
  return r;
}

FShared FShared::constant(const PrimeField& f, std::size_t parties, std::span<const Fe> v) {
  FShared r = zeros(f, parties, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r.s[0][i] = v[i];
  return r;
}

FShared FShared::slice(std::size_t lo, std::size_t n) const {
  if (lo + n > size()) throw std::out_of_range("FShared::slice");
  FShared r;
  r.f = f;
  for (const auto& p : s) r.s.emplace_back(p.begin() + lo, p.begin() + lo + n);
  return r;
}

FShared& FShared::append(const FShared& o) {
  if (s.empty()) return *this = o;
  if (o.f != f || o.parties() != parties()) throw DomainMismatch("append: shape mismatch");
  for (std::size_t p = 0; p < s.size(); ++p) s[p].insert(s[p].end(), o.s[p].begin(), o.s[p].end());
  return *this;
}

std::vector<Fe> FShared::reveal_for_testing() const {
  std::vector<Fe> out(size(), Fe::zero(*f));
  for (const auto& p : s) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  }
  return out;
}

FShared& FShared::operator+=(const FShared& o) {
  check_shape(*this, o);
  if (f != o.f) throw DomainMismatch("different fields");
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t i = 0; i < s[p].size(); ++i) s[p][i] += o.s[p][i];
  }
  return *this;
}

FShared& FShared::operator-=(const FShared& o) {
  check_shape(*this, o);
  if (f != o.f) throw DomainMismatch("different fields");
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t i = 0; i < s[p].size(); ++i) s[p][i] -= o.s[p][i];
  }
  return *this;
}

FShared FShared::scale(const Fe& c) const {
  FShared r = *this;
  for (auto& p : r.s) {
    for (auto& x : p) x *= c;
  }
  return r;
}

FShared FShared::add_public(std::span<const Fe> v) const {
  if (v.size() != size()) throw DomainMismatch("add_public: length mismatch");
  FShared r = *this;
  for (std::size_t i = 0; i < v.size(); ++i) r.s[0][i] += v[i];
  return r;
}

FShared lincomb(std::span<const Fe> coeffs, std::span<const FShared> vs) {
  if (coeffs.size() != vs.size() || vs.empty()) throw DomainMismatch("lincomb: coefficient count");
  FShared acc = vs[0].scale(coeffs[0]);
  for (std::size_t j = 1; j < vs.size(); ++j) acc += vs[j].scale(coeffs[j]);
  return acc;
}

FShared inner_public(std::span<const Fe> coeffs, const FShared& v) {
  if (coeffs.size() != v.size()) throw DomainMismatch("inner_public: length mismatch");
  FShared r = FShared::zeros(v.field(), v.parties(), 1);
  for (std::size_t p = 0; p < v.parties(); ++p) {
    Fe acc = Fe::zero(v.field());
    for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * v.s[p][i];
    r.s[p][0] = acc;
  }
  return r;
}

// ---- RShared ----

RShared RShared::zeros(std::size_t parties, std::size_t n, unsigned k) {
  RShared r;
  r.k = k;
  r.s.assign(parties, std::vector<std::uint64_t>(n, 0));
  return r;
}

RShared RShared::constant(std::size_t parties, std::span<const std::uint64_t> v, unsigned k) {
  RShared r = zeros(parties, v.size(), k);
  for (std::size_t i = 0; i < v.size(); ++i) r.s[0][i] = v[i] & r.mask();
  return r;
}

RShared RShared::slice(std::size_t lo, std::size_t n) const {
  if (lo + n > size()) throw std::out_of_range("RShared::slice");
  RShared r;
  r.k = k;
  for (const auto& p : s) r.s.emplace_back(p.begin() + lo, p.begin() + lo + n);
  return r;
}

RShared& RShared::append(const RShared& o) {
  if (s.empty()) return *this = o;
  if (o.k != k || o.parties() != parties()) throw DomainMismatch("append: shape mismatch");
  for (std::size_t p = 0; p < s.size(); ++p) s[p].insert(s[p].end(), o.s[p].begin(), o.s[p].end());
  return *this;
}

RShared RShared::gather(std::span<const std::size_t> idx) const {
  RShared r = zeros(parties(), idx.size(), k);
  for (std::size_t p = 0; p < parties(); ++p) {
    for (std::size_t i = 0; i < idx.size(); ++i) r.s[p][i] = s[p].at(idx[i]);
  }
  return r;
}

std::vector<std::uint64_t> RShared::reveal_for_testing() const {
  std::vector<std::uint64_t> out(size(), 0);
  for (const auto& p : s) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  }
  for (auto& x : out) x &= mask();
  return out;
}

RShared& RShared::operator+=(const RShared& o) {
  check_shape(*this, o);
  if (k != o.k) throw DomainMismatch("different ring widths");
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t i = 0; i < s[p].size(); ++i) s[p][i] = (s[p][i] + o.s[p][i]) & mask();
  }
  return *this;
}

RShared& RShared::operator-=(const RShared& o) {
  check_shape(*this, o);
  if (k != o.k) throw DomainMismatch("different ring widths");
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t i = 0; i < s[p].size(); ++i) s[p][i] = (s[p][i] - o.s[p][i]) & mask();
  }
  return *this;
}

RShared RShared::operator-() const {
  RShared r = *this;
  for (auto& p : r.s) {
    for (auto& x : p) x = (0 - x) & mask();
  }
  return r;
}

RShared RShared::scale(std::uint64_t c) const {
  RShared r = *this;
  for (auto& p : r.s) {
    for (auto& x : p) x = (x * c) & mask();
  }
  return r;
}

RShared RShared::scale_each(std::span<const std::uint64_t> c) const {
  if (c.size() != size()) throw DomainMismatch("scale_each: length mismatch");
  RShared r = *this;
  for (auto& p : r.s) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (p[i] * c[i]) & mask();
  }
  return r;
}

RShared RShared::add_public(std::span<const std::uint64_t> v) const {
  if (v.size() != size()) throw DomainMismatch("add_public: length mismatch");
  RShared r = *this;
  for (std::size_t i = 0; i < v.size(); ++i) r.s[0][i] = (r.s[0][i] + v[i]) & mask();
  return r;
}

RShared RShared::add_public(std::uint64_t c) const {
  RShared r = *this;
  for (auto& x : r.s[0]) x = (x + c) & mask();
  return r;
}

RShared RShared::sum_groups(std::size_t width) const {
  if (width == 0 || size() % width != 0) throw DomainMismatch("sum_groups: width does not divide size");
  RShared r = zeros(parties(), size() / width, k);
  for (std::size_t p = 0; p < parties(); ++p) {
    for (std::size_t i = 0; i < size(); ++i) r.s[p][i / width] += s[p][i];
    for (auto& x : r.s[p]) x &= mask();
  }
  return r;
}

RShared RShared::repeat_each(std::size_t times) const {
  RShared r = zeros(parties(), size() * times, k);
  for (std::size_t p = 0; p < parties(); ++p) {
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t t = 0; t < times; ++t) r.s[p][i * times + t] = s[p][i];
    }
  }
  return r;
}

// ---- BShared ----

BShared BShared::zeros(std::size_t parties, std::size_t n) {
  BShared r;
  r.n = n;
  r.s.assign(parties, std::vector<std::uint64_t>((n + 63) / 64, 0));
  return r;
}

BShared BShared::constant(std::size_t parties, std::size_t n, std::span<const std::uint64_t> words) {
  BShared r = zeros(parties, n);
  for (std::size_t w = 0; w < r.words(); ++w) r.s[0][w] = words[w] & word_mask(n, w);
  return r;
}

std::vector<std::uint64_t> BShared::reveal_for_testing() const {
  std::vector<std::uint64_t> out(words(), 0);
  for (const auto& p : s) {
    for (std::size_t w = 0; w < out.size(); ++w) out[w] ^= p[w];
  }
  return out;
}

BShared& BShared::operator^=(const BShared& o) {
  if (o.n != n || o.parties() != parties()) throw DomainMismatch("bit vectors differ in shape");
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t w = 0; w < s[p].size(); ++w) s[p][w] ^= o.s[p][w];
  }
  return *this;
}

BShared BShared::xor_public(std::span<const std::uint64_t> words) const {
  BShared r = *this;
  for (std::size_t w = 0; w < r.words(); ++w) r.s[0][w] ^= words[w] & word_mask(n, w);
  return r;
}

BShared BShared::flip() const {
  BShared r = *this;
  for (std::size_t w = 0; w < r.words(); ++w) r.s[0][w] ^= word_mask(n, w);
  return r;
}

BShared BShared::and_public(std::span<const std::uint64_t> words) const {
  BShared r = *this;
  for (auto& p : r.s) {
    for (std::size_t w = 0; w < r.words(); ++w) p[w] &= words[w];
  }
  return r;
}

std::vector<G1> GShared::reveal_for_testing() const {
  std::vector<G1> out = s.at(0);
  for (std::size_t p = 1; p < s.size(); ++p) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s[p][i];
  }
  return out;
}

}  // namespace arc::mpc
