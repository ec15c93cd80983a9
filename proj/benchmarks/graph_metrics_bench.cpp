#include <benchmark/benchmark.h>

#include <vector>

#include "rgnn/ensemble.hpp"
#include "rgnn/graph.hpp"
#include "rgnn/metrics.hpp"
#include "rgnn/random.hpp"

namespace {

using namespace rgnn;

void BM_GenerateDag(benchmark::State& state) {
  const auto n = static_cast<NodeId>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_random_dag(n, 0.5, seed++));
}
BENCHMARK(BM_GenerateDag)->Arg(20)->Arg(100)->Arg(500);

void BM_RocPoints(benchmark::State& state) {
  Xoshiro256 rng(1);
  std::vector<double> scores(static_cast<std::size_t>(state.range(0)));
  std::vector<int> positive(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform01();
    positive[i] = rng.uniform01() < 0.5;
  }
  for (auto _ : state) benchmark::DoNotOptimize(trapezoid_auc(roc_points(scores, positive)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RocPoints)->Arg(10000)->Arg(100000);

void BM_MajorityVote(benchmark::State& state) {
  Xoshiro256 rng(2);
  std::vector<std::vector<int>> votes(static_cast<std::size_t>(state.range(0)),
                                      std::vector<int>(10000));
  for (auto& member : votes)
    for (auto& v : member) v = static_cast<int>(rng.index(10));
  for (auto _ : state) benchmark::DoNotOptimize(majority_vote(votes).data());
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_MajorityVote)->Arg(5)->Arg(25);

}  // namespace
