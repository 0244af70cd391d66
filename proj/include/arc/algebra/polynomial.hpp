#pragma once

#include <stdexcept>
#include <vector>

#include "arc/algebra/field.hpp"

namespace arc {

struct NonZeroRemainder : std::domain_error {
  NonZeroRemainder() : std::domain_error("polynomial does not evaluate to the claimed value") {}
};

// Dense univariate polynomial; coeffs[i] multiplies z^i. Trailing zeros are
// stripped so that the zero polynomial has no coefficients.
class Polynomial {
 public:
  explicit Polynomial(const PrimeField& f) : f_(&f) {}
  Polynomial(const PrimeField& f, std::vector<Fe> coeffs);

  // Polynomial with the given values at degrees offset, offset+1, ...
  static Polynomial from_values(const PrimeField& f, const std::vector<Fe>& v, std::size_t offset);

  const PrimeField& field() const { return *f_; }
  const std::vector<Fe>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  // -1 for the zero polynomial.
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  Fe coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Fe::zero(*f_); }

  Fe eval(const Fe& z) const;
  // q with g(Z) - y = q(Z) (Z - x); throws NonZeroRemainder if g(x) != y.
  Polynomial div_linear(const Fe& x, const Fe& y) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scale(const Fe& s) const;
  bool operator==(const Polynomial& o) const { return f_ == o.f_ && c_ == o.c_; }

 private:
  void normalize();
  const PrimeField* f_;
  std::vector<Fe> c_;
};

}  // namespace arc
