#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "shiftdiv/rank_stats.hpp"

namespace {

void BM_RankCorrelation(benchmark::State& state) {
  std::mt19937 rng(9);
  std::normal_distribution<double> normal;
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& v : a) v = normal(rng);
  for (auto& v : b) v = normal(rng);
  for (auto _ : state) {
    const auto ra = shiftdiv::average_ranks(a, true);
    const auto rb = shiftdiv::average_ranks(b, true);
    benchmark::DoNotOptimize(shiftdiv::spearman_rho(ra, rb));
    benchmark::DoNotOptimize(shiftdiv::kendall_tau_b(ra, rb));
  }
}
BENCHMARK(BM_RankCorrelation)->Arg(3)->Arg(100)->Arg(1000);

}  // namespace
