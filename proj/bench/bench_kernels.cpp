// Parallel kernels vs their serial references.

#include <benchmark/benchmark.h>

#include "causelab/datagen.hpp"
#include "causelab/estimator.hpp"
#include "causelab/informer.hpp"
#include "causelab/nn.hpp"

using namespace causelab;

namespace {

const ModelSpec& spec() {
  static const ModelSpec s = ModelSpec::bundled();
  return s;
}

void BM_InformerParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(all_subpop_truths(spec()));
}
void BM_InformerSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::all_subpop_truths(spec()));
}

void BM_GenerateParallel(benchmark::State& st) {
  const auto n = static_cast<std::uint64_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(generate_range(spec(), Regime::observational, 1, 0, n));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
void BM_GenerateSerial(benchmark::State& st) {
  const auto n = static_cast<std::uint64_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(reference::generate(spec(), Regime::observational, 1, n));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_TallyParallel(benchmark::State& st) {
  const auto e = generate_range(spec(), Regime::experimental, 2, 0, 1'000'000);
  const auto o = generate_range(spec(), Regime::observational, 2, 0, 1'000'000);
  for (auto _ : st) benchmark::DoNotOptimize(tally(e, o));
}
void BM_TallySerial(benchmark::State& st) {
  const auto e = generate_range(spec(), Regime::experimental, 2, 0, 1'000'000);
  const auto o = generate_range(spec(), Regime::observational, 2, 0, 1'000'000);
  for (auto _ : st) benchmark::DoNotOptimize(reference::tally(e, o));
}

void BM_PredictParallel(benchmark::State& st) {
  const Network net = Network::init(Network::default_dims(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(predict_all(net));
}
void BM_PredictSerial(benchmark::State& st) {
  const Network net = Network::init(Network::default_dims(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(reference::predict_all(net));
}

}  // namespace

BENCHMARK(BM_InformerParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InformerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateParallel)->Arg(1'000'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateSerial)->Arg(1'000'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TallyParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TallySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
