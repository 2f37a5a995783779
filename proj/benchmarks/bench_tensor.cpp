// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "mtm/parameters.hpp"
#include "mtm/tensor.hpp"

namespace {

std::vector<double> draw(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return mtm::normal_values(n, 1.0, rng);
}

void BM_MatmulForward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = mtm::Tensor::constant({m, k}, draw(m * k, 1));
  const auto b = mtm::Tensor::constant({k, n}, draw(k * n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(mtm::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * m * k * n));
}
BENCHMARK(BM_MatmulForward)->Args({32, 64, 192})->Args({32, 64, 256})->Args({32, 16, 32})->Args({128, 64, 64});

void BM_MatmulBackward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto av = draw(m * k, 1);
  const auto bv = draw(k * n, 2);
  for (auto _ : state) {
    const auto a = mtm::Tensor::leaf({m, k}, av);
    const auto b = mtm::Tensor::leaf({k, n}, bv);
    mtm::backward(mtm::sum(mtm::matmul(a, b)));
    benchmark::DoNotOptimize(a.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(6 * m * k * n));
}
BENCHMARK(BM_MatmulBackward)->Args({32, 64, 192})->Args({32, 64, 256});

void BM_LayerNormSoftmax(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 64;
  const auto x = mtm::Tensor::constant({rows, dim}, draw(rows * dim, 3));
  const auto g = mtm::Tensor::constant({dim}, std::vector<double>(dim, 1.0));
  const auto b = mtm::Tensor::constant({dim}, std::vector<double>(dim, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(mtm::softmax(mtm::layer_norm(x, g, b)));
}
BENCHMARK(BM_LayerNormSoftmax)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
