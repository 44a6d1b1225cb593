#include <benchmark/benchmark.h>

#include <random>

#include "pol/kernels.hpp"
#include "pol/model.hpp"

namespace {

using namespace pol;

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor a = Tensor::uniform(Shape{n, n}, -1, 1, rng);
  const Tensor b = Tensor::uniform(Shape{n, n}, -1, 1, rng);
  Tensor c(Shape{n, n});
  for (auto _ : state) {
    gemm(n, n, n, a.ptr(), b.ptr(), c.ptr(), false);
    benchmark::DoNotOptimize(c.ptr());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm)->Arg(64)->Arg(128)->Arg(256);

// 3x3 conv at embedding resolution, C -> 4C as in the translation block.
void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(2);
  const Tensor x = Tensor::uniform(Shape{1, c, hw, hw}, -1, 1, rng);
  const Tensor w = Tensor::uniform(Shape{4 * c, c, 3, 3}, -0.1f, 0.1f, rng);
  const Tensor bias(Shape{4 * c});
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, bias, ConvSpec{1, 1, 0, PadMode::zeros}));
}
BENCHMARK(BM_Conv3x3)->Args({32, 16})->Args({64, 16})->Args({64, 64});

void BM_ConvBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const Tensor x = Tensor::uniform(Shape{1, c, 16, 16}, -1, 1, rng);
  const Tensor w = Tensor::uniform(Shape{4 * c, c, 3, 3}, -0.1f, 0.1f, rng);
  const Tensor g = Tensor::uniform(Shape{1, 4 * c, 16, 16}, -1, 1, rng);
  const ConvSpec spec{1, 1, 0, PadMode::zeros};
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d_grad_input(g, w, x.shape(), spec));
    benchmark::DoNotOptimize(conv2d_grad_weight(g, x, w.shape(), spec));
  }
}
BENCHMARK(BM_ConvBackward)->Arg(32)->Arg(64);

// f^n on a 64x64 image's embedding, no tape.
void BM_BlockIteration(benchmark::State& state) {
  ModelConfig cfg;
  cfg.embed_channels = 32;
  PolModel<float> model = build_model<float>(cfg, 4);
  std::mt19937_64 rng(5);
  const Tensor e = Tensor::uniform(Shape{1, cfg.embed_channels, cfg.embed_size(), cfg.embed_size()}, -1, 1, rng);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(iterate_block(model.gen_ab, e, n));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BlockIteration)->Arg(1)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
