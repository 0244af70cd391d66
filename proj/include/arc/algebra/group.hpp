#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

#include "arc/algebra/bytes.hpp"
#include "arc/algebra/field.hpp"

namespace arc {

class PairingGroup;

// Elements of the source and target groups. Under the mock backend each
// element is its discrete log with respect to the generator.
class G1 {
 public:
  G1() = default;
  const PairingGroup& group() const;
  bool is_identity() const;

  G1 operator+(const G1& o) const;
  G1 operator-(const G1& o) const { return *this + (-o); }
  G1 operator-() const;
  G1& operator+=(const G1& o) { return *this = *this + o; }
  G1& operator-=(const G1& o) { return *this = *this - o; }
  friend G1 operator*(const Fe& s, const G1& p) { return p.mul(s); }
  G1 mul(const Fe& s) const;
  bool operator==(const G1& o) const;

  Bytes to_bytes() const;  // compressed
  static G1 from_bytes(const PairingGroup& g, ByteSpan b);
  void write(ByteWriter& w) const { w.prefixed(to_bytes()); }
  static G1 read(const PairingGroup& g, ByteReader& r) { return from_bytes(g, r.prefixed()); }

  // Backend storage; projective blst point or mock exponent.
  using Raw = std::array<std::uint64_t, 18>;
  const Raw& raw() const { return raw_; }
  const Fe& exponent() const { return e_; }
  static G1 from_raw(const PairingGroup& g, const Raw& raw);
  static G1 from_exponent(const PairingGroup& g, const Fe& e);

 private:
  friend class PairingGroup;
  const PairingGroup* g_ = nullptr;
  Fe e_;
  Raw raw_{};
};

class G2 {
 public:
  G2() = default;
  const PairingGroup& group() const;
  bool is_identity() const;
  G2 operator+(const G2& o) const;
  G2 operator-(const G2& o) const { return *this + (-o); }
  G2 operator-() const;
  friend G2 operator*(const Fe& s, const G2& p) { return p.mul(s); }
  G2 mul(const Fe& s) const;
  bool operator==(const G2& o) const;
  Bytes to_bytes() const;
  static G2 from_bytes(const PairingGroup& g, ByteSpan b);

  using Raw = std::array<std::uint64_t, 36>;
  const Raw& raw() const { return raw_; }
  const Fe& exponent() const { return e_; }

 private:
  friend class PairingGroup;
  const PairingGroup* g_ = nullptr;
  Fe e_;
  Raw raw_{};
};

// Target group, written multiplicatively.
class GT {
 public:
  GT() = default;
  GT operator*(const GT& o) const;
  GT pow(const Fe& s) const;
  bool operator==(const GT& o) const;
  bool is_one() const;

  using Raw = std::array<std::uint64_t, 72>;

 private:
  friend class PairingGroup;
  const PairingGroup* g_ = nullptr;
  Fe e_;
  Raw raw_{};
};

// A bilinear group e: G1 x G2 -> GT over a prime-order scalar field.
// Backends: BLS12-381 (via blst) and a transparent mock where every element
// is its exponent and the pairing multiplies exponents.
class PairingGroup {
 public:
  enum class Kind { Mock, Bls12381 };

  static const PairingGroup& mock(const PrimeField& f);
  static const PairingGroup& bls12_381();

  Kind kind() const { return kind_; }
  bool is_mock() const { return kind_ == Kind::Mock; }
  const PrimeField& scalar_field() const { return *f_; }
  std::string name() const;

  G1 g1_identity() const;
  G1 g1_generator() const;
  G2 g2_identity() const;
  G2 g2_generator() const;
  // Deterministic point with unknown discrete log (for the mock backend the
  // log is derived from a hash and therefore public).
  G1 hash_to_g1(std::string_view tag, ByteSpan msg) const;

  GT pairing(const G1& a, const G2& b) const;
  // e(a1, b1) == e(a2, b2), counted as one pairing check.
  bool pairing_check(const G1& a1, const G2& b1, const G1& a2, const G2& b2) const;

  std::size_t g1_bytes() const;
  std::size_t g2_bytes() const;

  std::uint64_t pairing_checks() const { return checks_.load(); }
  void reset_pairing_checks() const { checks_ = 0; }

  PairingGroup(const PairingGroup&) = delete;
  PairingGroup& operator=(const PairingGroup&) = delete;

 private:
  PairingGroup(Kind k, const PrimeField& f) : kind_(k), f_(&f) {}
  Kind kind_;
  const PrimeField* f_;
  mutable std::atomic<std::uint64_t> checks_{0};
};

}  // namespace arc
