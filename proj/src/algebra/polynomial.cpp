#include "arc/algebra/polynomial.hpp"

namespace arc {

Polynomial::Polynomial(const PrimeField& f, std::vector<Fe> coeffs) : f_(&f), c_(std::move(coeffs)) {
  for (const auto& c : c_) {
    if (&c.field() != f_) throw ModulusMismatch();
  }
  normalize();
}

Polynomial Polynomial::from_values(const PrimeField& f, const std::vector<Fe>& v, std::size_t offset) {
  std::vector<Fe> c(offset, Fe::zero(f));
  c.insert(c.end(), v.begin(), v.end());
  return Polynomial(f, std::move(c));
}

void Polynomial::normalize() {
  while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

Fe Polynomial::eval(const Fe& z) const {
  if (&z.field() != f_) throw ModulusMismatch();
  Fe acc = Fe::zero(*f_);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Polynomial Polynomial::div_linear(const Fe& x, const Fe& y) const {
  if (&x.field() != f_ || &y.field() != f_) throw ModulusMismatch();
  if (c_.empty()) {
    if (!y.is_zero()) throw NonZeroRemainder();
    return Polynomial(*f_);
  }
  // synthetic division of g - y by (Z - x)
  std::vector<Fe> g = c_;
  g[0] -= y;
  std::vector<Fe> q(g.size() - 1, Fe::zero(*f_));
  Fe carry = Fe::zero(*f_);
  for (std::size_t i = g.size(); i-- > 1;) {
    carry = g[i] + carry * x;
    q[i - 1] = carry;
  }
  Fe rem = g[0] + carry * x;
  if (!rem.is_zero()) throw NonZeroRemainder();
  return Polynomial(*f_, std::move(q));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (f_ != o.f_) throw ModulusMismatch();
  std::vector<Fe> r(std::max(c_.size(), o.c_.size()), Fe::zero(*f_));
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Polynomial(*f_, std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o.scale(-Fe::one(*f_)); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (f_ != o.f_) throw ModulusMismatch();
  if (c_.empty() || o.c_.empty()) return Polynomial(*f_);
  std::vector<Fe> r(c_.size() + o.c_.size() - 1, Fe::zero(*f_));
  for (std::size_t i = 0; i < c_.size(); ++i) {
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  }
  return Polynomial(*f_, std::move(r));
}

Polynomial Polynomial::scale(const Fe& s) const {
  std::vector<Fe> r = c_;
  for (auto& c : r) c *= s;
  return Polynomial(*f_, std::move(r));
}

}  // namespace arc
