#include "arc/algebra/msm.hpp"

#include <blst.h>

#include <stdexcept>

#ifdef ARC_HAVE_OPENMP
#include <omp.h>
#endif

namespace arc {
namespace {

constexpr std::size_t kPippengerMin = 16;

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("msm: scalar and point counts differ");
}

G1 msm_chunk_blst(const PairingGroup& g, std::span<const Fe> s, std::span<const G1> p) {
  const std::size_t n = s.size();
  if (n < kPippengerMin) return msm_reference(g, s, p);
  std::vector<const blst_p1*> proj(n);
  for (std::size_t i = 0; i < n; ++i) proj[i] = reinterpret_cast<const blst_p1*>(p[i].raw().data());
  std::vector<blst_p1_affine> aff(n);
  blst_p1s_to_affine(aff.data(), proj.data(), n);
  std::vector<std::array<std::uint8_t, 32>> sc(n);
  std::vector<const blst_p1_affine*> ap(n);
  std::vector<const byte*> sp(n);
  for (std::size_t i = 0; i < n; ++i) {
    sc[i] = s[i].scalar_le();
    ap[i] = &aff[i];
    sp[i] = sc[i].data();
  }
  std::vector<limb_t> scratch(blst_p1s_mult_pippenger_scratch_sizeof(n) / sizeof(limb_t) + 1);
  G1::Raw out{};
  blst_p1s_mult_pippenger(reinterpret_cast<blst_p1*>(out.data()), ap.data(), n, sp.data(), 255,
                          scratch.data());
  return G1::from_raw(g, out);
}

G1 msm_chunk(const PairingGroup& g, std::span<const Fe> s, std::span<const G1> p) {
  if (g.is_mock()) {
    Fe acc = Fe::zero(g.scalar_field());
    for (std::size_t i = 0; i < s.size(); ++i) acc += s[i] * p[i].exponent();
    return G1::from_exponent(g, acc);
  }
  return msm_chunk_blst(g, s, p);
}

}  // namespace

int kernel_threads() {
#ifdef ARC_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

G1 msm_reference(const PairingGroup& g, std::span<const Fe> scalars, std::span<const G1> points) {
  check_lengths(scalars.size(), points.size());
  G1 acc = g.g1_identity();
  for (std::size_t i = 0; i < points.size(); ++i) acc += points[i].mul(scalars[i]);
  return acc;
}

G1 msm(const PairingGroup& g, std::span<const Fe> scalars, std::span<const G1> points) {
  check_lengths(scalars.size(), points.size());
  if (points.empty()) return g.g1_identity();
  const std::size_t n = points.size();
  const int threads = kernel_threads();
  const std::size_t chunks = std::min<std::size_t>(threads, (n + kPippengerMin - 1) / kPippengerMin);
  if (chunks <= 1) return msm_chunk(g, scalars, points);
  std::vector<G1> partial(chunks);
#ifdef ARC_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
    partial[c] = msm_chunk(g, scalars.subspan(lo, hi - lo), points.subspan(lo, hi - lo));
  }
  G1 acc = g.g1_identity();
  for (const auto& p : partial) acc += p;
  return acc;
}

std::vector<G1> power_ladder_reference(const G1& base, const Fe& x, std::size_t n) {
  std::vector<G1> out;
  out.reserve(n);
  Fe xi = Fe::one(x.field());
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(base.mul(xi));
    xi *= x;
  }
  return out;
}

std::vector<G1> power_ladder(const G1& base, const Fe& x, std::size_t n) {
  std::vector<Fe> exps(n);
  Fe xi = Fe::one(x.field());
  for (std::size_t i = 0; i < n; ++i) {
    exps[i] = xi;
    xi *= x;
  }
  std::vector<G1> out(n);
#ifdef ARC_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < n; ++i) out[i] = base.mul(exps[i]);
  return out;
}

std::vector<G1> two_base_each_reference(std::span<const Fe> a, const G1& p, std::span<const Fe> b,
                                        const G1& q) {
  check_lengths(a.size(), b.size());
  std::vector<G1> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(p.mul(a[i]) + q.mul(b[i]));
  return out;
}

std::vector<G1> two_base_each(std::span<const Fe> a, const G1& p, std::span<const Fe> b, const G1& q) {
  check_lengths(a.size(), b.size());
  std::vector<G1> out(a.size());
#ifdef ARC_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = p.mul(a[i]) + q.mul(b[i]);
  return out;
}

}  // namespace arc
