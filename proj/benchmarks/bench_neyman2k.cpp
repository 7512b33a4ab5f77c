#include <benchmark/benchmark.h>

#include "neyman2k/oracle.hpp"
#include "neyman2k/rng.hpp"
#include "neyman2k/simulate.hpp"

namespace {

using namespace neyman2k;

PotentialOutcomeTable bench_table(int units, int arms, std::uint64_t seed) {
  RandomEngine engine(seed);
  std::vector<std::uint8_t> outcomes(static_cast<std::size_t>(units) * arms);
  for (auto& value : outcomes) {
    value = uniform_below(engine, 10) < 4 ? 1 : 0;
  }
  return {units, arms, std::move(outcomes)};
}

void BM_ModelMatrix(benchmark::State& state) {
  const int factors = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ModelMatrix(factors));
  }
}
BENCHMARK(BM_ModelMatrix)->DenseRange(3, 8);

void BM_JointCounts(benchmark::State& state) {
  const auto table = bench_table(64, 8, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_joint_counts(table));
  }
}
BENCHMARK(BM_JointCounts);

void BM_EffectVarianceDirect(benchmark::State& state) {
  const ModelMatrix matrix(3);
  const auto table = bench_table(64, 8, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2_effect_direct(table, matrix, 1));
  }
}
BENCHMARK(BM_EffectVarianceDirect);

void BM_EffectVarianceCounts(benchmark::State& state) {
  const ModelMatrix matrix(3);
  const auto table = bench_table(64, 8, 2);
  const JointCounts counts = compute_joint_counts(table);
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2_effect_counts(counts, matrix, 1));
  }
}
BENCHMARK(BM_EffectVarianceCounts);

void BM_AssignmentEnumeration(benchmark::State& state) {
  const Design design(8, {2, 2, 2, 2});
  for (auto _ : state) {
    AssignmentEnumerator enumerator(design);
    Assignment assignment;
    std::size_t count = 0;
    while (enumerator.next(assignment)) {
      ++count;
    }
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_AssignmentEnumeration);

void BM_ExactMoments(benchmark::State& state) {
  const ModelMatrix matrix(2);
  const Design design(8, {2, 2, 2, 2});
  const auto table = bench_table(8, 4, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        exact_randomization_moments(table, matrix, design, 1));
  }
}
BENCHMARK(BM_ExactMoments);

void BM_CouplingMinimum(benchmark::State& state) {
  const ModelMatrix matrix(2);
  const MarginSpec spec(8, {4, 4, 4, 4});
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_s2_over_couplings(spec, matrix, 1));
  }
}
BENCHMARK(BM_CouplingMinimum);

void BM_CompleteRandomization(benchmark::State& state) {
  const Design design(400, std::vector<int>(8, 50));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(complete_randomization(design, ++seed));
  }
}
BENCHMARK(BM_CompleteRandomization);

void BM_RatioReplicates(benchmark::State& state) {
  SimConfig config;
  config.factors = 3;
  config.units = 400;
  config.replications = static_cast<int>(state.range(0));
  config.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ratio_simulation(config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RatioReplicates)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
