#include "arc/algebra/field.hpp"

#include <blst.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace arc {
namespace {

using u128 = unsigned __int128;

constexpr Limbs kBlsR = {0xffffffff00000001ULL, 0x53bda402fffe5bfeULL, 0x3339d80809a1d805ULL,
                         0x73eda753299d7d48ULL};

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

unsigned bit_length(const Limbs& v) {
  for (int i = 3; i >= 0; --i) {
    if (v[i]) return 64 * i + (64 - __builtin_clzll(v[i]));
  }
  return 0;
}

int cmp_limbs(const Limbs& a, const Limbs& b) {
  for (int i = 3; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

Limbs sub_limbs(const Limbs& a, const Limbs& b) {
  Limbs r{};
  unsigned borrow = 0;
  for (int i = 0; i < 4; ++i) {
    u128 d = static_cast<u128>(a[i]) - b[i] - borrow;
    r[i] = static_cast<std::uint64_t>(d);
    borrow = static_cast<unsigned>((d >> 64) & 1);
  }
  return r;
}

blst_fr* fr(Limbs& v) { return reinterpret_cast<blst_fr*>(v.data()); }
const blst_fr* fr(const Limbs& v) { return reinterpret_cast<const blst_fr*>(v.data()); }

Limbs to_mont(const Limbs& canonical) {
  Limbs out;
  blst_fr_from_uint64(fr(out), canonical.data());
  return out;
}

Limbs from_mont(const Limbs& mont) {
  Limbs out;
  blst_uint64_from_fr(out.data(), fr(mont));
  return out;
}

}  // namespace

PrimeField::PrimeField(Kind k, const Limbs& p) : kind_(k), p_(p), bits_(bit_length(p)) {}

const PrimeField& PrimeField::small(std::uint64_t p) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::unique_ptr<PrimeField>> interned;
  if (p < 3 || p >= (1ULL << 62) || !is_prime_u64(p)) {
    throw std::invalid_argument("small field modulus must be an odd prime below 2^62");
  }
  std::lock_guard lock(mu);
  auto& slot = interned[p];
  if (!slot) slot.reset(new PrimeField(Kind::Small, Limbs{p, 0, 0, 0}));
  return *slot;
}

const PrimeField& PrimeField::bls12_381_scalar() {
  static const PrimeField f(Kind::Bls12381Scalar, kBlsR);
  return f;
}

std::uint64_t PrimeField::small_modulus() const {
  if (kind_ != Kind::Small) throw std::logic_error("not a small field");
  return p_[0];
}

std::string PrimeField::name() const {
  if (kind_ == Kind::Bls12381Scalar) return "bls12-381-fr";
  return "F_" + std::to_string(p_[0]);
}

std::uint64_t PrimeField::order_minus_one_mod(std::uint64_t m) const {
  u128 acc = 0;
  for (int i = 3; i >= 0; --i) acc = ((acc << 64) | p_[i]) % m;
  return static_cast<std::uint64_t>((acc + m - 1) % m);
}

Fe Fe::zero(const PrimeField& f) { return Fe(&f, Limbs{}); }

Fe Fe::one(const PrimeField& f) { return from_u64(f, 1); }

Fe Fe::from_u64(const PrimeField& f, std::uint64_t v) {
  if (f.kind() == PrimeField::Kind::Small) return Fe(&f, Limbs{v % f.small_modulus(), 0, 0, 0});
  return Fe(&f, to_mont(Limbs{v, 0, 0, 0}));
}

Fe Fe::from_i64(const PrimeField& f, std::int64_t v) {
  if (v >= 0) return from_u64(f, static_cast<std::uint64_t>(v));
  return -from_u64(f, static_cast<std::uint64_t>(-(v + 1)) + 1);
}

Fe Fe::from_u128(const PrimeField& f, u128 v) {
  return from_limbs(f, Limbs{static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64), 0, 0});
}

Fe Fe::from_limbs(const PrimeField& f, const Limbs& v) {
  if (f.kind() == PrimeField::Kind::Small) {
    std::uint64_t p = f.small_modulus();
    u128 acc = 0;
    for (int i = 3; i >= 0; --i) acc = ((acc << 64) | v[i]) % p;
    return Fe(&f, Limbs{static_cast<std::uint64_t>(acc), 0, 0, 0});
  }
  if (cmp_limbs(v, f.modulus()) < 0) return Fe(&f, to_mont(v));
  // Horner in base 2^64.
  const Fe base = from_u64(f, UINT64_MAX) + one(f);
  Fe acc = zero(f);
  for (int i = 3; i >= 0; --i) acc = acc * base + from_u64(f, v[i]);
  return acc;
}

Fe Fe::from_bytes(const PrimeField& f, ByteSpan be) {
  if (be.size() != f.byte_size()) throw ParseError("field element has wrong width");
  Limbs v{};
  for (std::size_t i = 0; i < be.size(); ++i) {
    std::size_t pos = be.size() - 1 - i;
    v[i / 8] |= std::uint64_t{be[pos]} << (8 * (i % 8));
  }
  if (cmp_limbs(v, f.modulus()) >= 0) throw ParseError("field element not canonical");
  return from_limbs(f, v);
}

Fe Fe::from_bytes_reduce(const PrimeField& f, ByteSpan be) {
  const Fe base = from_u64(f, 256);
  Fe acc = zero(f);
  for (auto b : be) acc = acc * base + from_u64(f, b);
  return acc;
}

Fe Fe::random(const PrimeField& f, Rng& rng) {
  const unsigned bits = f.bits();
  for (;;) {
    Limbs v{};
    for (unsigned i = 0; i * 64 < bits; ++i) v[i] = rng();
    unsigned top = bits % 64;
    if (top) v[(bits - 1) / 64] &= (1ULL << top) - 1;
    if (cmp_limbs(v, f.modulus()) < 0) return from_limbs(f, v);
  }
}

const PrimeField& Fe::field() const {
  if (!f_) throw std::logic_error("detached field element");
  return *f_;
}

bool Fe::is_zero() const { return v_ == Limbs{}; }

bool Fe::is_one() const { return *this == one(field()); }

Fe Fe::inv() const {
  if (is_zero()) throw DivisionByZero();
  if (f_->kind() == PrimeField::Kind::Small) {
    // extended Euclid
    std::int64_t t = 0, nt = 1;
    std::int64_t r = static_cast<std::int64_t>(f_->small_modulus());
    std::int64_t nr = static_cast<std::int64_t>(v_[0]);
    while (nr != 0) {
      std::int64_t q = r / nr;
      std::tie(t, nt) = std::make_pair(nt, t - q * nt);
      std::tie(r, nr) = std::make_pair(nr, r - q * nr);
    }
    if (t < 0) t += static_cast<std::int64_t>(f_->small_modulus());
    return Fe(f_, Limbs{static_cast<std::uint64_t>(t), 0, 0, 0});
  }
  Limbs out;
  blst_fr_inverse(fr(out), fr(v_));
  return Fe(f_, out);
}

Fe Fe::pow(std::uint64_t e) const {
  Fe r = one(field());
  Fe a = *this;
  while (e) {
    if (e & 1) r *= a;
    a *= a;
    e >>= 1;
  }
  return r;
}

Fe Fe::operator-() const {
  if (f_->kind() == PrimeField::Kind::Small) {
    return Fe(f_, Limbs{v_[0] ? f_->small_modulus() - v_[0] : 0, 0, 0, 0});
  }
  Limbs out;
  blst_fr_cneg(fr(out), fr(v_), true);
  return Fe(f_, out);
}

Fe& Fe::operator+=(const Fe& o) {
  same_field(o);
  if (f_->kind() == PrimeField::Kind::Small) {
    std::uint64_t s = v_[0] + o.v_[0];
    std::uint64_t p = f_->small_modulus();
    v_[0] = s >= p ? s - p : s;
  } else {
    blst_fr_add(fr(v_), fr(v_), fr(o.v_));
  }
  return *this;
}

Fe& Fe::operator-=(const Fe& o) {
  same_field(o);
  if (f_->kind() == PrimeField::Kind::Small) {
    v_[0] = v_[0] >= o.v_[0] ? v_[0] - o.v_[0] : v_[0] + f_->small_modulus() - o.v_[0];
  } else {
    blst_fr_sub(fr(v_), fr(v_), fr(o.v_));
  }
  return *this;
}

Fe& Fe::operator*=(const Fe& o) {
  same_field(o);
  if (f_->kind() == PrimeField::Kind::Small) {
    v_[0] = mulmod(v_[0], o.v_[0], f_->small_modulus());
  } else {
    blst_fr_mul(fr(v_), fr(v_), fr(o.v_));
  }
  return *this;
}

bool Fe::operator==(const Fe& o) const {
  same_field(o);
  return v_ == o.v_;
}

std::strong_ordering Fe::operator<=>(const Fe& o) const {
  same_field(o);
  int c = cmp_limbs(limbs(), o.limbs());
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

Limbs Fe::limbs() const {
  if (f_ && f_->kind() == PrimeField::Kind::Bls12381Scalar) return from_mont(v_);
  return v_;
}

bool Fe::bit(unsigned i) const {
  if (i >= 256) return false;
  return (limbs()[i / 64] >> (i % 64)) & 1;
}

std::int64_t Fe::to_i64_centered() const {
  Limbs v = limbs();
  const Limbs half_bound{1ULL << 63, 0, 0, 0};
  if (cmp_limbs(v, half_bound) < 0) return static_cast<std::int64_t>(v[0]);
  Limbs neg = sub_limbs(field().modulus(), v);
  if (cmp_limbs(neg, half_bound) <= 0 && cmp_limbs(neg, v) < 0) {
    return static_cast<std::int64_t>(-static_cast<u128>(neg[0]));
  }
  throw std::range_error("field element outside signed 64-bit range");
}

Bytes Fe::to_bytes() const {
  Limbs v = limbs();
  const std::size_t n = field().byte_size();
  Bytes out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[n - 1 - i] = static_cast<std::uint8_t>(v[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

std::array<std::uint8_t, 32> Fe::scalar_le() const {
  Limbs v = limbs();
  std::array<std::uint8_t, 32> out{};
  for (std::size_t i = 0; i < 32; ++i) out[i] = static_cast<std::uint8_t>(v[i / 8] >> (8 * (i % 8)));
  return out;
}

std::string Fe::to_string() const {
  Limbs v = limbs();
  if (v == Limbs{}) return "0";
  std::string digits;
  while (v != Limbs{}) {
    u128 rem = 0;
    for (int i = 3; i >= 0; --i) {
      u128 cur = (rem << 64) | v[i];
      v[i] = static_cast<std::uint64_t>(cur / 10);
      rem = cur % 10;
    }
    digits.push_back(static_cast<char>('0' + static_cast<int>(rem)));
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

}  // namespace arc
