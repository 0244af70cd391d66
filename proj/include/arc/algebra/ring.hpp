#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "arc/algebra/bytes.hpp"

namespace arc {

// Element of Z_{2^k}, 1 <= k <= 64, with wrapping arithmetic.
class RingElement {
 public:
  RingElement() = default;
  explicit RingElement(std::uint64_t v, unsigned k = 64) : v_(v & mask(k)), k_(k) {
    if (k == 0 || k > 64) throw std::invalid_argument("ring bit width must be in [1, 64]");
  }
  static RingElement from_signed(std::int64_t v, unsigned k = 64) {
    return RingElement(static_cast<std::uint64_t>(v), k);
  }

  std::uint64_t value() const { return v_; }
  unsigned bits() const { return k_; }
  // Two's complement reading in k bits.
  std::int64_t to_signed() const {
    if (k_ == 64) return static_cast<std::int64_t>(v_);
    std::uint64_t sign = 1ULL << (k_ - 1);
    return static_cast<std::int64_t>((v_ ^ sign) - sign);
  }
  bool bit(unsigned i) const { return i < k_ && ((v_ >> i) & 1); }

  RingElement operator+(const RingElement& o) const { return make(check(o), v_ + o.v_); }
  RingElement operator-(const RingElement& o) const { return make(check(o), v_ - o.v_); }
  RingElement operator*(const RingElement& o) const { return make(check(o), v_ * o.v_); }
  RingElement operator-() const { return make(k_, 0 - v_); }
  RingElement& operator+=(const RingElement& o) { return *this = *this + o; }
  RingElement& operator-=(const RingElement& o) { return *this = *this - o; }
  RingElement& operator*=(const RingElement& o) { return *this = *this * o; }
  bool operator==(const RingElement& o) const { return k_ == o.k_ && v_ == o.v_; }

  void write(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(k_));
    w.u64(v_);
  }
  static RingElement read(ByteReader& r) {
    unsigned k = r.u8();
    std::uint64_t v = r.u64();
    if (k == 0 || k > 64 || (v & ~mask(k))) throw ParseError("malformed ring element");
    return RingElement(v, k);
  }
  std::string to_string() const { return std::to_string(v_); }

  static constexpr std::uint64_t mask(unsigned k) { return k >= 64 ? ~0ULL : ((1ULL << k) - 1); }

 private:
  static RingElement make(unsigned k, std::uint64_t v) {
    RingElement r;
    r.v_ = v & mask(k);
    r.k_ = k;
    return r;
  }
  unsigned check(const RingElement& o) const {
    if (k_ != o.k_) throw std::invalid_argument("ring elements of different widths");
    return k_;
  }
  std::uint64_t v_ = 0;
  unsigned k_ = 64;
};

}  // namespace arc
