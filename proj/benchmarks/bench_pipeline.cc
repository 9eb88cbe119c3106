#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "satemu/emu_engine.h"
#include "satemu/kernel_deploy.h"
#include "satemu/synth.h"
#include "satemu/trace_model.h"

namespace satemu {
namespace {

RawTrace BenchTrace(std::size_t n) {
  SynthParams p;
  p.length = n;
  p.period = 1500;
  p.levels = {30 * kMillisecond, 45 * kMillisecond, 38 * kMillisecond};
  p.jitter = 20 * kMillisecond;  // wide enough to reorder neighbours
  p.loss_rate = 0.02;
  p.seed = 99;
  return SynthTrace(p);
}

void BM_SplitTrace(benchmark::State& state) {
  const RawTrace raw = BenchTrace(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(SplitTrace(raw));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SplitTrace)->Arg(10'000)->Arg(1'000'000);

void BM_ArrivalOrder(benchmark::State& state) {
  const SplitResult split = SplitTrace(BenchTrace(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComputeArrivalOrder(split.delays, kDefaultSendInterval));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ArrivalOrder)->Arg(10'000)->Arg(1'000'000);

void BM_Simulate(benchmark::State& state) {
  const SplitResult split = SplitTrace(BenchTrace(state.range(0)));
  const LossTrace loss = ReorderLoss(
      split.loss, ComputeArrivalOrder(split.delays, kDefaultSendInterval));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Simulate(split.delays, loss, kDefaultSendInterval));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10'000)->Arg(1'000'000);

void BM_EncodeMap(benchmark::State& state) {
  const SplitResult split = SplitTrace(BenchTrace(state.range(0)));
  for (auto _ : state) {
    const MapImage img = BuildDelayImage(split.delays);
    benchmark::DoNotOptimize(EmitMapCommands(img, MapId{1}).script);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeMap)->Arg(10'000);

}  // namespace
}  // namespace satemu

BENCHMARK_MAIN();
