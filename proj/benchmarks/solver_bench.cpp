#include <benchmark/benchmark.h>

#include "rgnn/random.hpp"
#include "rgnn/solver.hpp"

namespace {

using namespace rgnn;

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// One iteration on an L-feature, 10-target problem; the factorization is
// cached outside the loop as in solve().
void BM_AdmmStep(benchmark::State& state) {
  const Index features = state.range(0);
  const auto problem =
      LeastSquaresProblem::from_data(gaussian(2 * features, features, 1),
                                                    gaussian(2 * features, 10, 2));
  AdmmConfig cfg;
  const Factorization factorization(problem, cfg.rho);
  auto s = AdmmState::zeros(features, 10);
  for (auto _ : state) {
    s = admm_step(s, problem, cfg, factorization);
    benchmark::DoNotOptimize(s.w.data());
  }
}
BENCHMARK(BM_AdmmStep)->Arg(128)->Arg(512)->Arg(2048);

void BM_Factorization(benchmark::State& state) {
  const Index features = state.range(0);
  const auto problem =
      LeastSquaresProblem::from_data(gaussian(2 * features, features, 3),
                                                    gaussian(2 * features, 10, 4));
  for (auto _ : state) {
    Factorization f(problem, 1.0);
    benchmark::DoNotOptimize(&f);
  }
}
BENCHMARK(BM_Factorization)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_AccumulateNormalEquations(benchmark::State& state) {
  const Matrix z = gaussian(2048, state.range(0), 5);
  const Matrix t = gaussian(2048, 10, 6);
  for (auto _ : state) {
    auto problem = LeastSquaresProblem::empty(z.cols(), t.cols());
    problem.accumulate(z, t);
    benchmark::DoNotOptimize(problem.gram.data());
  }
  state.SetItemsProcessed(state.iterations() * z.rows());
}
BENCHMARK(BM_AccumulateNormalEquations)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_SolveLasso(benchmark::State& state) {
  const Matrix z = gaussian(100, 30, 7);
  const Matrix t = gaussian(100, 1, 8);
  AdmmConfig cfg;
  cfg.regularizer = Regularizer::L1;
  cfg.lambda = 1.0;
  cfg.max_iter = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(z, t, cfg).weights.data());
}
BENCHMARK(BM_SolveLasso)->Arg(100)->Arg(1000);

}  // namespace
