#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace arc {

constexpr unsigned kFracBits = 16;

struct FixedOverflow : std::overflow_error {
  using std::overflow_error::overflow_error;
};

// Round-to-nearest encoding of a real value with f fractional bits.
inline std::int64_t fx_encode(double x, unsigned f = kFracBits) {
  double scaled = std::ldexp(x, static_cast<int>(f));
  if (!(std::fabs(scaled) < 0x1p62)) throw FixedOverflow("value outside fixed-point range");
  return static_cast<std::int64_t>(std::llround(scaled));
}

inline double fx_decode(std::int64_t v, unsigned f = kFracBits) {
  return std::ldexp(static_cast<double>(v), -static_cast<int>(f));
}

// Truncation toward zero by 2^f.
inline std::int64_t fx_trunc(std::int64_t x, unsigned f = kFracBits) {
  return x / (std::int64_t{1} << f);
}

// Product that must fit in 64 bits before truncation, matching the ring
// computation exactly.
inline std::int64_t fx_mul_raw(std::int64_t a, std::int64_t b) {
  __int128 p = static_cast<__int128>(a) * b;
  if (p > INT64_MAX || p < INT64_MIN) throw FixedOverflow("fixed-point product overflows 64 bits");
  return static_cast<std::int64_t>(p);
}

inline std::int64_t fx_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw FixedOverflow("fixed-point sum overflows 64 bits");
  return r;
}

inline std::int64_t fx_mul_trunc(std::int64_t a, std::int64_t b, unsigned f = kFracBits) {
  return fx_trunc(fx_mul_raw(a, b), f);
}

}  // namespace arc
