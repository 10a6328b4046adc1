#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "shiftdiv/wer.hpp"

namespace {

std::vector<std::string> words(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<int> sym(0, 49);
  std::vector<std::string> out(n);
  for (auto& w : out) w = "w" + std::to_string(sym(rng));
  return out;
}

void BM_WordErrorRate(benchmark::State& state) {
  std::mt19937 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ref = words(rng, n);
  const auto hyp = words(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(shiftdiv::word_error_rate(ref, hyp).wer);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WordErrorRate)->RangeMultiplier(4)->Range(8, 512)->Complexity(benchmark::oNSquared);

void BM_Normalize(benchmark::State& state) {
  const std::string text = "The Quick, brown fox; jumps over the LAZY dog!  Again and again.";
  for (auto _ : state) benchmark::DoNotOptimize(shiftdiv::normalize(text));
}
BENCHMARK(BM_Normalize);

}  // namespace
