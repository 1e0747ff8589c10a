#include <benchmark/benchmark.h>

#include "synpatch/pipeline.hpp"

using namespace synpatch;

namespace {

pipeline::RunConfig corpus_config() {
  pipeline::RunConfig cfg;
  cfg.manifest = SYNPATCH_SOURCE_DIR "/data/corpus/manifest.txt";
  cfg.warnings = SYNPATCH_SOURCE_DIR "/data/corpus/warnings.json";
  return cfg;
}

void BM_ValidateSerial(benchmark::State& state) {
  pipeline::RunConfig cfg = corpus_config();
  pipeline::Workspace ws = pipeline::load(cfg);
  for (auto _ : state) {
    auto r = pipeline::run_serial(ws, cfg, pipeline::Depth::Validate);
    benchmark::DoNotOptimize(r.totals);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ws.warnings.size()));
}
BENCHMARK(BM_ValidateSerial)->Unit(benchmark::kMillisecond);

void BM_ValidateParallel(benchmark::State& state) {
  pipeline::RunConfig cfg = corpus_config();
  cfg.workers = static_cast<int>(state.range(0));
  pipeline::Workspace ws = pipeline::load(cfg);
  for (auto _ : state) {
    auto r = pipeline::run_parallel(ws, cfg, pipeline::Depth::Validate);
    benchmark::DoNotOptimize(r.totals);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ws.warnings.size()));
}
BENCHMARK(BM_ValidateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
