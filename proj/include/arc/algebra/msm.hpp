#pragma once

#include <span>
#include <vector>

#include "arc/algebra/group.hpp"

namespace arc {

// Sum of scalars[i] * points[i]. Parallel over chunks when built with OpenMP;
// on BLS12-381 each chunk runs a Pippenger bucket MSM.
G1 msm(const PairingGroup& g, std::span<const Fe> scalars, std::span<const G1> points);
// Naive double-and-add sum, kept as the reference for tests and benchmarks.
G1 msm_reference(const PairingGroup& g, std::span<const Fe> scalars, std::span<const G1> points);

// (x^i * base) for i in [0, n).
std::vector<G1> power_ladder(const G1& base, const Fe& x, std::size_t n);
std::vector<G1> power_ladder_reference(const G1& base, const Fe& x, std::size_t n);

// out[i] = a[i] * p + b[i] * q.
std::vector<G1> two_base_each(std::span<const Fe> a, const G1& p, std::span<const Fe> b, const G1& q);
std::vector<G1> two_base_each_reference(std::span<const Fe> a, const G1& p, std::span<const Fe> b,
                                        const G1& q);

// Number of worker threads the parallel kernels will use.
int kernel_threads();

}  // namespace arc
