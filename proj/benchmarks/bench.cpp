#include <benchmark/benchmark.h>

#include <vector>

#include "rlp/batching.hpp"
#include "rlp/dataset.hpp"
#include "rlp/loss.hpp"
#include "rlp/lstsq.hpp"
#include "rlp/model.hpp"
#include "rlp/random.hpp"

using namespace rlp;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed, Stream::theory);
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.normal();
  return m;
}

void BM_LeastSquares(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix x = random_matrix(m, d, 1);
  const Matrix y = random_matrix(m, 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(least_squares_project(x, y));
}
BENCHMARK(BM_LeastSquares)->Args({7, 5})->Args({64, 11})->Args({64, 784});

void BM_RlpBatch(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix x = random_matrix(m, d, 1);
  const Matrix y = random_matrix(m, 1, 2);
  const Matrix h = random_matrix(m, 1, 3);
  const BatchProjector proj = make_projector(x);
  const std::vector<double> probe(d, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(rlp_batch(proj, y, h, probe));
}
BENCHMARK(BM_RlpBatch)->Args({7, 5})->Args({13, 11});

void BM_ForwardBackward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const ModelParams model = build_regression_net(7, 32, 1);
  const Matrix x = random_matrix(m, 7, 2);
  const Matrix y = random_matrix(m, 1, 3);
  for (auto _ : state) {
    const ForwardCache cache = forward(model, x);
    benchmark::DoNotOptimize(backward(model, cache, mse(cache.output, y).dL_dH));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(9)->Arg(64);

void BM_BalancedBatches(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(balanced_batches(n, 9, 1000, 5));
}
BENCHMARK(BM_BalancedBatches)->Arg(100)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
