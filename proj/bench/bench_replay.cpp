// Serial vs OpenMP fictitious-replay kernel on the standard CDE instance.
#include <benchmark/benchmark.h>

#include "oeoe/cde.hpp"

namespace {

struct Fixture {
  oeoe::Instance inst = oeoe::make_cde_instance(8, 4, 2, 0.05, 0.95, 7);
  oeoe::EwLogLoss base{inst};
  std::vector<int> xs;
  std::vector<oeoe::Table> refs;
  Fixture() {
    oeoe::Stream rng = oeoe::substream(1, "bench");
    for (int s = 0; s < 16; ++s) {
      xs.push_back(static_cast<int>(rng() % inst.n_x));
      refs.push_back(inst.cls[rng() % inst.size()]);
    }
  }
};

void BM_ReplaySerial(benchmark::State& state) {
  Fixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(oeoe::replay_serial(
        f.inst, f.base, f.xs, f.refs, static_cast<int>(state.range(0)), 3, 17));
}

void BM_ReplayParallel(benchmark::State& state) {
  Fixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(oeoe::replay_parallel(
        f.inst, f.base, f.xs, f.refs, static_cast<int>(state.range(0)), 3, 17));
}

}  // namespace

BENCHMARK(BM_ReplaySerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ReplayParallel)->Arg(1000)->Arg(10000);
BENCHMARK_MAIN();
