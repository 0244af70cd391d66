#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "arc/mpc/engine.hpp"
#include "arc/mpc/fixed.hpp"

namespace arc::ml {

// Value backends shared by training, inference and auditing. Every backend
// offers the same vector operations; "real" values carry kFracBits fractional
// bits in the fixed-point backends, "int" values (comparison bits, counts)
// carry none. PlainBackend reproduces the MPC ring arithmetic exactly, so the
// two fixed-point paths agree bit for bit.
//
//   input / input_int      owner-supplied values
//   constant / constant_int public values
//   add, sub               any values of the same kind
//   add_public(_int)       plus public reals / ints
//   mul                    real * real, truncated once
//   mul_int                int * anything, exact
//   mul_public             value * public real, truncated once
//   scale_int              value * public int, exact
//   dot_groups             sums of real products over groups of `width`, truncated once per group
//   matvec_public          public real matrix (row-major, out x size(v)) times v, truncated once per output
//   ltz                    1 if negative else 0 (int)
//   to_real                int value as a real, exact
//   gather, concat, sum_groups, repeat_each   layout, local
//   open_real / open_int   reveal to the output recipient

// Helpers for building public operand vectors.
inline std::vector<double> filled(std::size_t n, double v) { return std::vector<double>(n, v); }
inline std::vector<std::int64_t> filled_int(std::size_t n, std::int64_t v) { return std::vector<std::int64_t>(n, v); }

class PlainBackend {
 public:
  using Vec = std::vector<std::int64_t>;

  Vec input(std::optional<std::size_t>, std::span<const double> x) { return constant(x); }
  Vec input_int(std::optional<std::size_t>, std::span<const std::int64_t> x) { return {x.begin(), x.end()}; }
  Vec constant(std::span<const double> x) const;
  Vec constant_int(std::span<const std::int64_t> x) const { return {x.begin(), x.end()}; }
  Vec zeros(std::size_t n) const { return Vec(n, 0); }

  Vec add(const Vec& a, const Vec& b) const;
  Vec sub(const Vec& a, const Vec& b) const;
  Vec add_public(const Vec& a, std::span<const double> c) const { return add(a, constant(c)); }
  Vec add_public_int(const Vec& a, std::span<const std::int64_t> c) const { return add(a, constant_int(c)); }
  Vec mul(const Vec& a, const Vec& b);
  Vec mul_int(const Vec& a, const Vec& b);
  Vec mul_public(const Vec& a, std::span<const double> c);
  Vec scale_int(const Vec& a, std::span<const std::int64_t> c) const;
  Vec dot_groups(const Vec& a, const Vec& b, std::size_t width);
  Vec matvec_public(std::span<const double> A, const Vec& v);
  Vec ltz(const Vec& a);
  Vec to_real(const Vec& a) const { return scale_int(a, filled_int(a.size(), std::int64_t{1} << kFracBits)); }

  Vec gather(const Vec& a, std::span<const std::size_t> idx) const;
  Vec concat(const Vec& a, const Vec& b) const;
  Vec sum_groups(const Vec& a, std::size_t width) const;
  Vec repeat_each(const Vec& a, std::size_t times) const;
  std::size_t size(const Vec& a) const { return a.size(); }

  std::vector<double> open_real(const Vec& a) { return decode(a); }
  std::vector<std::int64_t> open_int(const Vec& a) { return a; }
  static std::vector<double> decode(const Vec& a);
};

class MpcBackend {
 public:
  using Vec = mpc::RShared;

  // Results are opened towards `recipients` parties outside the committee.
  explicit MpcBackend(mpc::Engine& e, std::size_t recipients = 1) : e_(&e), recipients_(recipients) {}
  mpc::Engine& engine() { return *e_; }

  Vec input(std::optional<std::size_t> owner, std::span<const double> x);
  Vec input_int(std::optional<std::size_t> owner, std::span<const std::int64_t> x);
  Vec constant(std::span<const double> x) const;
  Vec constant_int(std::span<const std::int64_t> x) const;
  Vec zeros(std::size_t n) const { return mpc::RShared::zeros(e_->parties(), n); }

  Vec add(const Vec& a, const Vec& b) const { return a + b; }
  Vec sub(const Vec& a, const Vec& b) const { return a - b; }
  Vec add_public(const Vec& a, std::span<const double> c) const { return a + constant(c); }
  Vec add_public_int(const Vec& a, std::span<const std::int64_t> c) const { return a + constant_int(c); }
  Vec mul(const Vec& a, const Vec& b);
  Vec mul_int(const Vec& a, const Vec& b);
  Vec mul_public(const Vec& a, std::span<const double> c);
  Vec scale_int(const Vec& a, std::span<const std::int64_t> c) const;
  Vec dot_groups(const Vec& a, const Vec& b, std::size_t width);
  Vec matvec_public(std::span<const double> A, const Vec& v);
  Vec ltz(const Vec& a);
  Vec to_real(const Vec& a) const { return a.scale(std::uint64_t{1} << kFracBits); }

  Vec gather(const Vec& a, std::span<const std::size_t> idx) const { return a.gather(idx); }
  Vec concat(const Vec& a, const Vec& b) const;
  Vec sum_groups(const Vec& a, std::size_t width) const { return a.sum_groups(width); }
  Vec repeat_each(const Vec& a, std::size_t times) const { return a.repeat_each(times); }
  std::size_t size(const Vec& a) const { return a.size(); }

  std::vector<double> open_real(const Vec& a);
  std::vector<std::int64_t> open_int(const Vec& a);

 private:
  mpc::Engine* e_;
  std::size_t recipients_;
};

// Floating-point reference path, no fixed-point rounding.
class DoubleBackend {
 public:
  using Vec = std::vector<double>;

  Vec input(std::optional<std::size_t>, std::span<const double> x) { return {x.begin(), x.end()}; }
  Vec input_int(std::optional<std::size_t>, std::span<const std::int64_t> x) { return constant_int(x); }
  Vec constant(std::span<const double> x) const { return {x.begin(), x.end()}; }
  Vec constant_int(std::span<const std::int64_t> x) const { return {x.begin(), x.end()}; }
  Vec zeros(std::size_t n) const { return Vec(n, 0.0); }

  Vec add(const Vec& a, const Vec& b) const;
  Vec sub(const Vec& a, const Vec& b) const;
  Vec add_public(const Vec& a, std::span<const double> c) const { return add(a, constant(c)); }
  Vec add_public_int(const Vec& a, std::span<const std::int64_t> c) const { return add(a, constant_int(c)); }
  Vec mul(const Vec& a, const Vec& b) const;
  Vec mul_int(const Vec& a, const Vec& b) const { return mul(a, b); }
  Vec mul_public(const Vec& a, std::span<const double> c) const { return mul(a, constant(c)); }
  Vec scale_int(const Vec& a, std::span<const std::int64_t> c) const { return mul(a, constant_int(c)); }
  Vec dot_groups(const Vec& a, const Vec& b, std::size_t width) const { return sum_groups(mul(a, b), width); }
  Vec matvec_public(std::span<const double> A, const Vec& v) const;
  Vec ltz(const Vec& a) const;
  Vec to_real(const Vec& a) const { return a; }

  Vec gather(const Vec& a, std::span<const std::size_t> idx) const;
  Vec concat(const Vec& a, const Vec& b) const;
  Vec sum_groups(const Vec& a, std::size_t width) const;
  Vec repeat_each(const Vec& a, std::size_t times) const;
  std::size_t size(const Vec& a) const { return a.size(); }

  std::vector<double> open_real(const Vec& a) const { return a; }
  std::vector<std::int64_t> open_int(const Vec& a) const;
};

}  // namespace arc::ml
