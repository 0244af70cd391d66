#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "arc/algebra/bytes.hpp"
#include "arc/algebra/rng.hpp"

namespace arc {

struct ModulusMismatch : std::invalid_argument {
  ModulusMismatch() : std::invalid_argument("operands belong to different fields") {}
};

struct DivisionByZero : std::domain_error {
  DivisionByZero() : std::domain_error("inverse of zero") {}
};

using Limbs = std::array<std::uint64_t, 4>;  // little-endian 256-bit integer

// A prime field context. Instances are interned and live for the whole
// process, so elements can refer to them by pointer.
class PrimeField {
 public:
  enum class Kind { Small, Bls12381Scalar };

  // p must be prime and below 2^62.
  static const PrimeField& small(std::uint64_t p);
  // Scalar field of BLS12-381 (r, 255 bits).
  static const PrimeField& bls12_381_scalar();

  Kind kind() const { return kind_; }
  const Limbs& modulus() const { return p_; }
  std::uint64_t small_modulus() const;
  unsigned bits() const { return bits_; }
  std::size_t byte_size() const { return (bits_ + 7) / 8; }
  std::string name() const;

  // (p - 1) mod m, for small m.
  std::uint64_t order_minus_one_mod(std::uint64_t m) const;
  // True when 2^k < p.
  bool exceeds_pow2(unsigned k) const { return bits_ > k; }

  PrimeField(const PrimeField&) = delete;
  PrimeField& operator=(const PrimeField&) = delete;

 private:
  PrimeField(Kind k, const Limbs& p);
  Kind kind_;
  Limbs p_;
  unsigned bits_;
};

class Fe {
 public:
  Fe() = default;  // detached placeholder; assign before use

  static Fe zero(const PrimeField& f);
  static Fe one(const PrimeField& f);
  static Fe from_u64(const PrimeField& f, std::uint64_t v);
  static Fe from_i64(const PrimeField& f, std::int64_t v);
  static Fe from_u128(const PrimeField& f, unsigned __int128 v);
  // Reduces any 256-bit little-endian integer.
  static Fe from_limbs(const PrimeField& f, const Limbs& v);
  // Strict: the value must already be canonical.
  static Fe from_bytes(const PrimeField& f, ByteSpan be);
  // Interprets arbitrary big-endian bytes as an integer and reduces it.
  static Fe from_bytes_reduce(const PrimeField& f, ByteSpan be);
  static Fe random(const PrimeField& f, Rng& rng);

  const PrimeField& field() const;
  bool attached() const { return f_ != nullptr; }

  bool is_zero() const;
  bool is_one() const;
  Fe inv() const;
  Fe pow(std::uint64_t e) const;
  Fe square() const { return *this * *this; }

  Fe operator-() const;
  Fe& operator+=(const Fe& o);
  Fe& operator-=(const Fe& o);
  Fe& operator*=(const Fe& o);
  Fe& operator/=(const Fe& o) { return *this *= o.inv(); }
  friend Fe operator+(Fe a, const Fe& b) { return a += b; }
  friend Fe operator-(Fe a, const Fe& b) { return a -= b; }
  friend Fe operator*(Fe a, const Fe& b) { return a *= b; }
  friend Fe operator/(Fe a, const Fe& b) { return a /= b; }

  bool operator==(const Fe& o) const;
  std::strong_ordering operator<=>(const Fe& o) const;

  // Canonical residue.
  Limbs limbs() const;
  std::uint64_t low_u64() const { return limbs()[0]; }
  bool bit(unsigned i) const;
  // Signed reading: values above p/2 map to -(p - v). Throws if out of int64.
  std::int64_t to_i64_centered() const;

  Bytes to_bytes() const;                      // fixed width, big-endian
  std::array<std::uint8_t, 32> scalar_le() const;  // 32-byte little-endian
  void write(ByteWriter& w) const { w.prefixed(to_bytes()); }
  static Fe read(const PrimeField& f, ByteReader& r) { return from_bytes(f, r.prefixed()); }
  std::string to_string() const;

 private:
  Fe(const PrimeField* f, const Limbs& raw) : f_(f), v_(raw) {}
  void same_field(const Fe& o) const {
    if (f_ != o.f_) throw ModulusMismatch();
  }
  const PrimeField* f_ = nullptr;
  Limbs v_{};  // Small: v_[0]; BLS: Montgomery form
};

}  // namespace arc
