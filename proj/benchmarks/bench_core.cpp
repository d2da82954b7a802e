#include <benchmark/benchmark.h>

#include "latdesign/fold_oracle.hpp"
#include "latdesign/qubo.hpp"
#include "latdesign/solvers.hpp"

using namespace latdesign;

namespace {

const CompactEnsemble& ensemble4() {
  static const CompactEnsemble e = CompactEnsemble::enumerate(4);
  return e;
}

}  // namespace

static void BM_EnumerateCompact(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_compact_conformations(side));
}
BENCHMARK(BM_EnumerateCompact)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_FoldEnergies(benchmark::State& state) {
  const FoldingEngine engine(ensemble4(), ground_truth_matrix(3));
  const auto s = random_sequence({{5, 5, 6}}, 1);
  std::vector<double> out, scratch;
  for (auto _ : state) {
    engine.energies(s.types(), out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FoldEnergies);

static void BM_SwapDelta(benchmark::State& state) {
  const auto& ens = ensemble4();
  const ScoringFunction g(DeltaContactMap(ens.contact_map(5), ens.average()), ground_truth_matrix(3));
  const auto s = random_sequence({{5, 5, 6}}, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.swap_delta(s.types(), i % 16, (i * 7 + 3) % 16));
    ++i;
  }
}
BENCHMARK(BM_SwapDelta);

static void BM_SequenceSa(benchmark::State& state) {
  const auto& ens = ensemble4();
  const ScoringFunction g(DeltaContactMap(ens.contact_map(5), ens.average()), ground_truth_matrix(3));
  AnnealSchedule sched;
  sched.n_steps = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sequence_sa(g, random_sequence({{5, 5, 6}}, sched.seed), sched).best_value);
    ++sched.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SequenceSa)->Arg(10'000);

static void BM_QuboSa(benchmark::State& state) {
  const auto& ens = ensemble4();
  const Composition comp{{5, 5, 6}};
  const auto p = encode(DeltaContactMap(ens.contact_map(5), ens.average()), ground_truth_matrix(3), comp,
                        QuboWeights{});
  AnnealSchedule sched;
  sched.n_steps = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qubo_sa(p, comp, sched, 1).energy);
    ++sched.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuboSa)->Arg(100'000);

static void BM_CensusChunk(benchmark::State& state) {
  const auto ens = CompactEnsemble::enumerate(3);
  CensusOptions opts;
  opts.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(designability_census(ens, {{3, 3, 3}}, ground_truth_matrix(3), 3.0, 0.8, opts));
  }
}
BENCHMARK(BM_CensusChunk)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
