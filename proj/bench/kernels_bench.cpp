#include <benchmark/benchmark.h>

#include "arc/algebra/msm.hpp"

using namespace arc;

namespace {

const PairingGroup& curve() { return PairingGroup::bls12_381(); }

struct Inputs {
  std::vector<Fe> a, b;
  std::vector<G1> points;
};

Inputs make_inputs(std::size_t n) {
  const auto& g = curve();
  const auto& f = g.scalar_field();
  Rng rng(42);
  Inputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.a.push_back(Fe::random(f, rng));
    in.b.push_back(Fe::random(f, rng));
    in.points.push_back(G1::from_exponent(g, Fe::random(f, rng)));
  }
  return in;
}

void BM_Msm(benchmark::State& st) {
  const auto in = make_inputs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(msm(curve(), in.a, in.points));
  st.counters["threads"] = kernel_threads();
}

void BM_MsmReference(benchmark::State& st) {
  const auto in = make_inputs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(msm_reference(curve(), in.a, in.points));
}

void BM_PowerLadder(benchmark::State& st) {
  const auto& g = curve();
  Rng rng(7);
  const Fe x = Fe::random(g.scalar_field(), rng);
  for (auto _ : st) benchmark::DoNotOptimize(power_ladder(g.g1_generator(), x, static_cast<std::size_t>(st.range(0))));
  st.counters["threads"] = kernel_threads();
}

void BM_PowerLadderReference(benchmark::State& st) {
  const auto& g = curve();
  Rng rng(7);
  const Fe x = Fe::random(g.scalar_field(), rng);
  for (auto _ : st)
    benchmark::DoNotOptimize(power_ladder_reference(g.g1_generator(), x, static_cast<std::size_t>(st.range(0))));
}

void BM_TwoBaseEach(benchmark::State& st) {
  const auto in = make_inputs(static_cast<std::size_t>(st.range(0)));
  const G1 p = in.points.front(), q = in.points.back();
  for (auto _ : st) benchmark::DoNotOptimize(two_base_each(in.a, p, in.b, q));
  st.counters["threads"] = kernel_threads();
}

void BM_TwoBaseEachReference(benchmark::State& st) {
  const auto in = make_inputs(static_cast<std::size_t>(st.range(0)));
  const G1 p = in.points.front(), q = in.points.back();
  for (auto _ : st) benchmark::DoNotOptimize(two_base_each_reference(in.a, p, in.b, q));
}

}  // namespace

BENCHMARK(BM_Msm)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MsmReference)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerLadder)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerLadderReference)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TwoBaseEach)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TwoBaseEachReference)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
