#include <benchmark/benchmark.h>

#include "shiftdiv/divergence.hpp"
#include "shiftdiv/simulate.hpp"

namespace {

void BM_TrainClassifier(benchmark::State& state) {
  const double means[] = {-1.0, 1.0};
  const double sds[] = {1.0, 1.0};
  const auto data =
      shiftdiv::sample(shiftdiv::gaussian_1d(means, sds), static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    auto model = shiftdiv::train_classifier(data, shiftdiv::TrainConfig{});
    benchmark::DoNotOptimize(model.weights().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}
BENCHMARK(BM_TrainClassifier)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state) {
  const double means[] = {-1.0, 1.0};
  const double sds[] = {1.0, 1.0};
  const auto spec = shiftdiv::gaussian_1d(means, sds);
  for (auto _ : state) benchmark::DoNotOptimize(shiftdiv::sample(spec, 10000, 5).size());
}
BENCHMARK(BM_Sample)->Unit(benchmark::kMicrosecond);

}  // namespace
