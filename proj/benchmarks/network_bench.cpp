#include <benchmark/benchmark.h>

#include "rgnn/features.hpp"
#include "rgnn/network.hpp"

namespace {

using namespace rgnn;

Matrix uniform(Index rows, Index cols, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform01();
  return m;
}

void BM_FrfWindow(benchmark::State& state) {
  const auto window = sample_frf_window(128, state.range(0), 1.0, 1);
  const Matrix f = uniform(1024, 128, 2);
  for (auto _ : state) benchmark::DoNotOptimize(apply_frf_window(window, f).data());
  state.SetItemsProcessed(state.iterations() * f.rows());
}
BENCHMARK(BM_FrfWindow)->Arg(10)->Arg(100)->Arg(1000);

// Forward pass of one graph over a 1024-row block of 128-d SAE features.
void BM_GraphForward(benchmark::State& state) {
  const auto n = static_cast<NodeId>(state.range(0));
  ArchitectureConfig arch;
  arch.graphs = {{n, 0.5}};
  Xoshiro256 rng(3);
  const auto layer = sample_layer(generate_random_dag(n, 0.5, 4), 128, arch, rng);
  const Matrix input = uniform(1024, 128, 5);
  for (auto _ : state) benchmark::DoNotOptimize(graph_forward(layer, input).data());
  state.SetItemsProcessed(state.iterations() * input.rows());
}
BENCHMARK(BM_GraphForward)->Arg(4)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_FitSae(benchmark::State& state) {
  const Matrix x = uniform(state.range(0), 784, 6);
  for (auto _ : state) benchmark::DoNotOptimize(fit_sae(x, 128, 1e-3, 7).weights.data());
}
BENCHMARK(BM_FitSae)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
