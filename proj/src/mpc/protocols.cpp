#include "arc/mpc/protocols.hpp"

#include "arc/algebra/msm.hpp"

namespace arc::mpc {
namespace {

using u128 = unsigned __int128;

BShared ones(std::size_t parties, std::size_t n) {
  std::vector<std::uint64_t> w((n + 63) / 64, ~0ULL);
  return BShared::constant(parties, n, w);
}

const BShared& plane_or_zero(const BitPlanes& planes, unsigned j, const BShared& zero) {
  return j < planes.size() ? planes[j] : zero;
}

// Opens a group of planes in one round and returns the integers they encode.
std::vector<u128> open_planes(Engine& e, std::span<const BShared> planes) {
  const std::size_t n = planes.empty() ? 0 : planes[0].n;
  BShared all = concat_bits(planes);
  auto words = e.open_bits(all, false);
  std::vector<u128> out(n, 0);
  for (std::size_t j = 0; j < planes.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (get_bit(words, j * n + i)) out[i] |= static_cast<u128>(1) << j;
    }
  }
  return out;
}

u128 fe_to_u128(const Fe& x) {
  Limbs l = x.limbs();
  if (l[2] || l[3]) throw RangeViolation("masked value exceeds 128 bits");
  return (static_cast<u128>(l[1]) << 64) | l[0];
}

void check_range_zero(Engine& e, std::span<const BShared> high, const char* what) {
  if (high.empty()) return;
  BShared any = or_all(e, high);
  auto w = e.open_bits(any, false);
  for (std::size_t i = 0; i < any.n; ++i) {
    if (get_bit(w, i)) throw RangeViolation(what);
  }
}

}  // namespace

std::vector<std::uint64_t> public_plane(std::span<const std::uint64_t> values, unsigned j) {
  std::vector<std::uint64_t> w((values.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < values.size(); ++i) w[i / 64] |= ((values[i] >> j) & 1) << (i % 64);
  return w;
}

std::vector<std::uint64_t> public_plane(std::span<const u128> values, unsigned j) {
  std::vector<std::uint64_t> w((values.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[i / 64] |= static_cast<std::uint64_t>((values[i] >> j) & 1) << (i % 64);
  }
  return w;
}

BitPlanes add_public_shared(Engine& e, const std::vector<std::vector<std::uint64_t>>& pub, const BitPlanes& sh,
                            unsigned width, bool carry_in) {
  if (sh.empty()) throw DomainMismatch("adder needs at least one shared plane");
  const std::size_t n = sh[0].n, P = e.parties();
  const BShared zero = BShared::zeros(P, n);
  const std::vector<std::uint64_t> no_bits(zero.words(), 0);
  BitPlanes out;
  out.reserve(width);
  BShared carry;
  bool carry_public = true;
  for (unsigned j = 0; j < width; ++j) {
    const BShared& s = plane_or_zero(sh, j, zero);
    const auto& p = j < pub.size() ? pub[j] : no_bits;
    if (carry_public) {
      BShared sum = s.xor_public(p);
      if (carry_in) sum = sum.flip();
      out.push_back(sum);
      if (j + 1 < width) {
        BShared ps = s.and_public(p);
        carry = carry_in ? (ps ^ s).xor_public(p) : ps;
        carry_public = false;
      }
    } else {
      out.push_back((s ^ carry).xor_public(p));
      if (j + 1 < width) {
        BShared sc = e.and_bits(s, carry);
        carry = sc ^ (s ^ carry).and_public(p);
      }
    }
  }
  return out;
}

BitPlanes add_shared(Engine& e, const BitPlanes& a, const BitPlanes& b, unsigned width) {
  if (a.empty() && b.empty()) throw DomainMismatch("adder needs at least one shared plane");
  const std::size_t n = a.empty() ? b[0].n : a[0].n;
  const BShared zero = BShared::zeros(e.parties(), n);
  BitPlanes out;
  out.reserve(width);
  BShared carry;
  bool have_carry = false;
  for (unsigned j = 0; j < width; ++j) {
    const BShared& x = plane_or_zero(a, j, zero);
    const BShared& y = plane_or_zero(b, j, zero);
    if (!have_carry) {
      out.push_back(x ^ y);
      if (j + 1 < width) {
        carry = e.and_bits(x, y);
        have_carry = true;
      }
    } else {
      out.push_back(x ^ y ^ carry);
      if (j + 1 < width) carry = carry ^ e.and_bits(x ^ carry, y ^ carry);
    }
  }
  return out;
}

BShared concat_bits(std::span<const BShared> parts) {
  if (parts.empty()) throw DomainMismatch("concat_bits: nothing to concatenate");
  std::size_t total = 0;
  for (const auto& p : parts) total += p.n;
  BShared out = BShared::zeros(parts[0].parties(), total);
  std::size_t pos = 0;
  for (const auto& part : parts) {
    for (std::size_t q = 0; q < out.parties(); ++q) {
      for (std::size_t i = 0; i < part.n; ++i) {
        std::uint64_t bit = (part.s[q][i / 64] >> (i % 64)) & 1;
        out.s[q][(pos + i) / 64] |= bit << ((pos + i) % 64);
      }
    }
    pos += part.n;
  }
  return out;
}

BShared slice_bits(const BShared& b, std::size_t lo, std::size_t n) {
  if (lo + n > b.n) throw std::out_of_range("slice_bits");
  BShared out = BShared::zeros(b.parties(), n);
  for (std::size_t q = 0; q < b.parties(); ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bit = (b.s[q][(lo + i) / 64] >> ((lo + i) % 64)) & 1;
      out.s[q][i / 64] |= bit << (i % 64);
    }
  }
  return out;
}

BShared or_all(Engine& e, std::span<const BShared> planes) {
  if (planes.empty()) throw DomainMismatch("or_all: no planes");
  const std::size_t n = planes[0].n;
  std::vector<BShared> level;
  for (const auto& p : planes) level.push_back(p.flip());
  while (level.size() > 1) {
    std::vector<BShared> lhs, rhs;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      lhs.push_back(level[i]);
      rhs.push_back(level[i + 1]);
    }
    BShared prod = e.and_bits(concat_bits(lhs), concat_bits(rhs));
    std::vector<BShared> next;
    for (std::size_t i = 0; i < lhs.size(); ++i) next.push_back(slice_bits(prod, i * n, n));
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0].flip();
}

BitPlanes bit_decompose(Engine& e, const RShared& x) {
  auto eda = e.edabits_ring(x.size(), x.k);
  auto c = e.open_ring(x - eda.r, false);
  std::vector<std::vector<std::uint64_t>> pub;
  for (unsigned j = 0; j < x.k; ++j) pub.push_back(public_plane(c, j));
  return add_public_shared(e, pub, eda.bits, x.k);
}

RShared bits_to_ring(Engine& e, const BShared& b, unsigned k) {
  auto da = e.dabits(b.n, k);
  auto opened = e.open_bits(b ^ da.b, false);
  const std::uint64_t mask = RingElement::mask(k);
  std::vector<std::uint64_t> coef(b.n), bias(b.n);
  for (std::size_t i = 0; i < b.n; ++i) {
    bool bit = get_bit(opened, i);
    coef[i] = bit ? mask : 1;  // -1 or 1
    bias[i] = bit ? 1 : 0;
  }
  return da.r.scale_each(coef).add_public(bias);
}

RShared ltz(Engine& e, const RShared& x) {
  BitPlanes planes = bit_decompose(e, x);
  return bits_to_ring(e, planes.back(), x.k);
}

RShared trunc_exact(Engine& e, const RShared& x, unsigned f) {
  const unsigned k = x.k;
  if (f == 0) return x;
  if (f >= k) throw std::invalid_argument("trunc_exact: shift exceeds ring width");
  const std::size_t n = x.size();
  BitPlanes planes = bit_decompose(e, x);
  BShared low = or_all(e, std::span<const BShared>(planes).first(f));
  BShared corr = e.and_bits(planes[k - 1], low);
  std::vector<BShared> group(planes.begin() + f, planes.end());
  group.push_back(corr);
  RShared all = bits_to_ring(e, concat_bits(group), k);
  RShared out = RShared::zeros(e.parties(), n, k);
  for (unsigned j = f; j < k; ++j) {
    RShared bj = all.slice((j - f) * n, n);
    std::uint64_t w = 1ULL << (j - f);
    out += (j == k - 1) ? -bj.scale(w) : bj.scale(w);
  }
  out += all.slice((k - f) * n, n);
  return out;
}

RShared mul_trunc(Engine& e, const RShared& a, const RShared& b, unsigned f) {
  return trunc_exact(e, e.mul_ring(a, b), f);
}

FShared ring_to_field(Engine& e, const RShared& x, unsigned l, unsigned kappa, std::vector<u128>* masked) {
  if (l == 0 || l > 64 || x.k != 64) throw std::invalid_argument("ring_to_field: bit width must be in [1, 64]");
  if (!e.field().exceeds_pow2(l + kappa + 1)) {
    throw std::invalid_argument("ring_to_field: field too small for l + kappa + 1 bits");
  }
  const std::size_t n = x.size();
  const std::uint64_t shift = 1ULL << (l - 1);
  RShared xs = x.add_public(shift);
  BitPlanes planes = bit_decompose(e, xs);
  check_range_zero(e, std::span<const BShared>(planes).subspan(l), "value outside the signed conversion range");
  planes.resize(l);
  auto eda = e.edabits_field(n, l + kappa);
  BitPlanes sum = add_shared(e, planes, eda.bits, l + kappa + 1);
  std::vector<u128> eps = open_planes(e, sum);
  if (masked) *masked = eps;
  std::vector<Fe> pub;
  pub.reserve(n);
  for (auto v : eps) pub.push_back(Fe::from_u128(e.field(), v) - Fe::from_u64(e.field(), shift));
  return FShared::constant(e.field(), e.parties(), pub) - eda.r;
}

RShared field_to_ring(Engine& e, const FShared& x, unsigned l, unsigned kappa) {
  if (l == 0 || l > 64) throw std::invalid_argument("field_to_ring: bit width must be in [1, 64]");
  if (!e.field().exceeds_pow2(l + kappa + 1)) {
    throw std::invalid_argument("field_to_ring: field too small for l + kappa + 1 bits");
  }
  const std::size_t n = x.size();
  const unsigned m = l + kappa, w = m + 1;
  const std::uint64_t shift = 1ULL << (l - 1);
  std::vector<Fe> shift_v(n, Fe::from_u64(e.field(), shift));
  FShared xs = x.add_public(shift_v);
  auto eda = e.edabits_field(n, m);
  auto opened = e.open(xs + eda.r, false);
  std::vector<u128> eps;
  eps.reserve(n);
  for (const auto& v : opened) eps.push_back(fe_to_u128(v));
  std::vector<std::vector<std::uint64_t>> pub;
  for (unsigned j = 0; j < w; ++j) pub.push_back(public_plane(eps, j));
  // eps - r = eps + ~r + 1 over w bits
  BitPlanes neg;
  for (unsigned j = 0; j < w; ++j) neg.push_back(j < m ? eda.bits[j].flip() : ones(e.parties(), n));
  BitPlanes diff = add_public_shared(e, pub, neg, w, true);
  check_range_zero(e, std::span<const BShared>(diff).subspan(l), "value outside the signed conversion range");
  diff.resize(l);
  auto reda = e.edabits_ring(n, 64);
  BitPlanes sum = add_shared(e, diff, reda.bits, 64);
  std::vector<u128> s = open_planes(e, sum);
  std::vector<std::uint64_t> pub_s;
  pub_s.reserve(n);
  for (auto v : s) pub_s.push_back(static_cast<std::uint64_t>(v) - shift);
  return RShared::constant(e.parties(), pub_s) - reda.r;
}

GShared dist_commit_pedersen(const PedersenParams& pp, const FShared& m, const FShared& r) {
  if (r.size() != 1 || r.parties() != m.parties()) throw DomainMismatch("dist_commit: randomness shape");
  GShared out;
  for (std::size_t p = 0; p < m.parties(); ++p) out.s.push_back({pedersen_commit(pp, m.s[p], r.s[p][0])});
  return out;
}

GShared dist_commit_kzg(const KzgParams& pp, const FShared& values, std::size_t offset, const FShared& r) {
  if (r.size() != 1 || r.parties() != values.parties()) throw DomainMismatch("dist_commit: randomness shape");
  GShared out;
  for (std::size_t p = 0; p < values.parties(); ++p) {
    out.s.push_back({kzg_commit_values(pp, values.s[p], offset, r.s[p][0])});
  }
  return out;
}

}  // namespace arc::mpc
