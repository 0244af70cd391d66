#include "arc/commit/kzg.hpp"

#include "arc/algebra/msm.hpp"

namespace arc {
namespace {

KzgParams finish(const PairingGroup& g, const Fe& alpha, std::vector<G1> powers) {
  KzgParams pp;
  pp.group = &g;
  pp.powers = std::move(powers);
  pp.h2 = g.g2_generator();
  pp.alpha_h2 = pp.h2.mul(alpha);
  return pp;
}

void check_degree(const KzgParams& pp, std::size_t top) {
  if (top >= pp.max_degree()) {
    throw DegreeOverflow("polynomial degree exceeds the committable range of the parameters");
  }
}

}  // namespace

KzgParams kzg_setup_with_trapdoor(const PairingGroup& g, const Fe& alpha, std::size_t d) {
  if (d < 1) throw std::invalid_argument("kzg_setup: degree must be at least 1");
  return finish(g, alpha, power_ladder(g.g1_generator(), alpha, d + 1));
}

KzgParams kzg_setup_reference(const PairingGroup& g, const Fe& alpha, std::size_t d) {
  if (d < 1) throw std::invalid_argument("kzg_setup: degree must be at least 1");
  return finish(g, alpha, power_ladder_reference(g.g1_generator(), alpha, d + 1));
}

KzgParams kzg_setup(const PairingGroup& g, std::uint64_t seed, std::size_t d) {
  Rng rng(derive_seed(seed, 0x6b7a67));
  Fe alpha = Fe::random(g.scalar_field(), rng);
  while (alpha.is_zero()) alpha = Fe::random(g.scalar_field(), rng);
  KzgParams pp = kzg_setup_with_trapdoor(g, alpha, d);
  alpha = Fe::zero(g.scalar_field());
  return pp;
}

G1 kzg_commit_values(const KzgParams& pp, std::span<const Fe> values, std::size_t offset, const Fe& r) {
  if (!values.empty()) check_degree(pp, offset + values.size() - 1);
  G1 c = msm(*pp.group, values, std::span<const G1>(pp.powers).subspan(offset, values.size()));
  return c + pp.powers.back().mul(r);
}

G1 kzg_commit(const KzgParams& pp, const Polynomial& g, const Fe& r) {
  return kzg_commit_values(pp, g.coeffs(), 0, r);
}

KzgOpening kzg_prove(const KzgParams& pp, const Polynomial& g, const Fe& r, const Fe& x, const Fe& y) {
  if (g.degree() >= 0) check_degree(pp, static_cast<std::size_t>(g.degree()));
  Polynomial q = g.div_linear(x, y);
  const std::size_t top = pp.max_degree();
  // (Z^top - x^top) / (Z - x) = sum_j x^(top-1-j) Z^j
  std::vector<Fe> coeffs(top, Fe::zero(x.field()));
  Fe xp = Fe::one(x.field());
  for (std::size_t j = top; j-- > 0;) {
    coeffs[j] = r * xp;
    xp *= x;
  }
  for (std::size_t j = 0; j < q.coeffs().size(); ++j) coeffs[j] += q.coeffs()[j];
  KzgOpening o;
  o.proof = msm(*pp.group, coeffs, std::span<const G1>(pp.powers).first(top));
  o.value = y + r * xp;  // xp == x^top here
  return o;
}

bool kzg_check(const KzgParams& pp, const G1& c, const Fe& x, const Fe& value, const G1& proof) {
  try {
    const auto& g = *pp.group;
    return g.pairing_check(proof, pp.alpha_h2 - pp.h2.mul(x), c - pp.h1().mul(value), pp.h2);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace arc
