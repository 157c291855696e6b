// Serial reference vs OpenMP Monte Carlo, and the closed forms for scale.
// Thread count follows OMP_NUM_THREADS / LEVY_EXCHANGE_THREADS.

#include <benchmark/benchmark.h>

#include "exlevy/mc_engine.hpp"
#include "exlevy/models.hpp"
#include "exlevy/pricing_closed.hpp"

using namespace exlevy;

namespace {

models::ModelSpec setup(double a) {
  const auto kind = a > 0.0 ? models::Kind::VGPP : models::Kind::VG;
  return models::make_bivariate(kind, 0.01, {-0.2012, 0.2}, {-0.1712, 0.3}, 0.8, {a, 2.0, 2.0 * (1.0 - a)});
}

mc::SimPlan plan(benchmark::State& state) {
  mc::SimPlan p;
  p.n_paths = static_cast<std::uint64_t>(state.range(0));
  p.seed = 42;
  return p;
}

const ExchangeContract kContract{100.0, 105.0, 1.0, 0.0};

void BM_McSerial(benchmark::State& state) {
  const auto spec = setup(0.3);
  const auto p = plan(state);
  for (auto _ : state) benchmark::DoNotOptimize(mc::price_exchange_mc_serial(kContract, spec, p).price);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_McParallel(benchmark::State& state) {
  const auto spec = setup(0.3);
  const auto p = plan(state);
  for (auto _ : state) benchmark::DoNotOptimize(mc::price_exchange_mc(kContract, spec, p).price);
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = mc::worker_threads();
}

void BM_SimulateSerial(benchmark::State& state) {
  const auto spec = setup(0.3);
  const auto p = plan(state);
  for (auto _ : state) benchmark::DoNotOptimize(mc::simulate_increments_serial(spec, {0.25, 0.5, 1.0}, p).data.data());
}

void BM_SimulateParallel(benchmark::State& state) {
  const auto spec = setup(0.3);
  const auto p = plan(state);
  for (auto _ : state) benchmark::DoNotOptimize(mc::simulate_increments(spec, {0.25, 0.5, 1.0}, p).data.data());
  state.counters["threads"] = mc::worker_threads();
}

void BM_VgClosed(benchmark::State& state) {
  const auto spec = setup(0.0);
  for (auto _ : state) benchmark::DoNotOptimize(pricing::price_vg_exchange_closed(kContract, spec).price);
}

void BM_VgppSeries(benchmark::State& state) {
  const auto spec = setup(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(pricing::price_vgpp_exchange_closed(kContract, spec).price);
}

}  // namespace

BENCHMARK(BM_McSerial)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McParallel)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateSerial)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Arg(100'000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_VgClosed)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VgppSeries)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
