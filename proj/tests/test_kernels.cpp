#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pol/kernels.hpp"
#include "pol/parallel.hpp"

namespace {

using namespace pol;

// Straight nested-loop convolution, the reference for the im2col kernels.
TensorD naive_conv(const TensorD& x, const TensorD& w, const TensorD& b, const ConvSpec& s) {
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  const std::size_t ho = (h + 2 * s.padding - k) / s.stride + 1;
  const std::size_t wo = (wd + 2 * s.padding - k) / s.stride + 1;
  TensorD y(Shape{n, cout, ho, wo});
  auto idx = [&](std::ptrdiff_t i, std::size_t ext, bool& inside) {
    inside = true;
    if (i >= 0 && i < static_cast<std::ptrdiff_t>(ext)) return static_cast<std::size_t>(i);
    if (s.pad_mode == PadMode::zeros) {
      inside = false;
      return std::size_t{0};
    }
    return static_cast<std::size_t>(i < 0 ? -i : 2 * static_cast<std::ptrdiff_t>(ext - 1) - i);
  };
  for (std::size_t b0 = 0; b0 < n; ++b0)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t oy = 0; oy < ho; ++oy)
        for (std::size_t ox = 0; ox < wo; ++ox) {
          double acc = b[co];
          for (std::size_t ci = 0; ci < cin; ++ci)
            for (std::size_t ky = 0; ky < k; ++ky)
              for (std::size_t kx = 0; kx < k; ++kx) {
                bool in_y, in_x;
                const auto iy = idx(static_cast<std::ptrdiff_t>(oy * s.stride + ky) - static_cast<std::ptrdiff_t>(s.padding), h, in_y);
                const auto ix = idx(static_cast<std::ptrdiff_t>(ox * s.stride + kx) - static_cast<std::ptrdiff_t>(s.padding), wd, in_x);
                if (in_y && in_x) acc += x.at(b0, ci, iy, ix) * w.at(co, ci, ky, kx);
              }
          y.at(b0, co, oy, ox) = acc;
        }
  return y;
}

struct ConvCase {
  std::size_t cin, cout, h, k;
  ConvSpec spec;
};

class ConvOracle : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvOracle, MatchesNestedLoops) {
  const auto& c = GetParam();
  std::mt19937_64 rng(11);
  const TensorD x = TensorD::uniform(Shape{2, c.cin, c.h, c.h + 1}, -1, 1, rng);
  const TensorD w = TensorD::uniform(Shape{c.cout, c.cin, c.k, c.k}, -1, 1, rng);
  const TensorD b = TensorD::uniform(Shape{c.cout}, -1, 1, rng);
  const TensorD got = conv2d(x, w, b, c.spec);
  const TensorD want = naive_conv(x, w, b, c.spec);
  ASSERT_EQ(got.shape(), want.shape());
  EXPECT_LT(max_abs_diff(got, want), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, ConvOracle,
    ::testing::Values(ConvCase{3, 4, 9, 3, {1, 1, 0, PadMode::zeros}}, ConvCase{2, 5, 10, 3, {2, 1, 0, PadMode::zeros}},
                      ConvCase{3, 2, 12, 7, {2, 3, 0, PadMode::reflect}}, ConvCase{4, 3, 8, 4, {2, 1, 0, PadMode::zeros}},
                      ConvCase{1, 1, 6, 1, {1, 0, 0, PadMode::zeros}}));

// <conv(x), y> == <x, conv^T(y)> pins the input gradient and the transposed
// convolution to the forward kernel.
TEST(ConvAdjoint, GradInputIsAdjoint) {
  std::mt19937_64 rng(3);
  const ConvSpec spec{2, 1, 0, PadMode::zeros};
  const TensorD x = TensorD::uniform(Shape{1, 3, 8, 8}, -1, 1, rng);
  const TensorD w = TensorD::uniform(Shape{4, 3, 3, 3}, -1, 1, rng);
  const TensorD zero(Shape{4});
  const TensorD y0 = conv2d(x, w, zero, spec);
  const TensorD y = TensorD::uniform(y0.shape(), -1, 1, rng);
  const TensorD gx = conv2d_grad_input(y, w, x.shape(), spec);
  EXPECT_NEAR(dot(y0, y), dot(x, gx), 1e-10);
}

TEST(ConvAdjoint, TransposedConvIsAdjointOfConv) {
  std::mt19937_64 rng(4);
  const ConvSpec spec{2, 1, 1, PadMode::zeros};
  // Transposed weights are (C_in, C_out, k, k): reading the same buffer as a
  // forward conv from C_out to C_in gives the adjoint pair.
  const TensorD w = TensorD::uniform(Shape{4, 3, 3, 3}, -1, 1, rng);
  const TensorD u = TensorD::uniform(Shape{1, 4, 5, 5}, -1, 1, rng);
  const TensorD up = conv_transpose2d(u, w, TensorD(Shape{3}), spec);
  ASSERT_EQ(up.shape(), (Shape{1, 3, 10, 10}));
  const TensorD v = TensorD::uniform(up.shape(), -1, 1, rng);
  const TensorD down = conv2d(v, w, TensorD(Shape{4}), ConvSpec{2, 1, 0, PadMode::zeros});
  ASSERT_EQ(down.shape(), u.shape());
  EXPECT_NEAR(dot(up, v), dot(u, down), 1e-10);
}

TEST(ConvShapes, RejectsMismatchedChannels) {
  const Tensor x(Shape{1, 3, 8, 8});
  const Tensor w(Shape{4, 2, 3, 3});
  EXPECT_THROW(conv2d(x, w, Tensor(Shape{4}), ConvSpec{1, 1, 0, PadMode::zeros}), DimensionError);
}

TEST(ConvShapes, RejectsReflectPadLargerThanInput) {
  const Tensor x(Shape{1, 1, 3, 3});
  const Tensor w(Shape{1, 1, 7, 7});
  EXPECT_THROW(conv2d(x, w, Tensor(Shape{1}), ConvSpec{1, 3, 0, PadMode::reflect}), DimensionError);
}

TEST(Gemm, MatchesNaiveProduct) {
  std::mt19937_64 rng(5);
  const std::size_t m = 37, n = 29, k = 41;
  const TensorD a = TensorD::uniform(Shape{m, k}, -1, 1, rng);
  const TensorD b = TensorD::uniform(Shape{k, n}, -1, 1, rng);
  TensorD c(Shape{m, n}, 1.0);
  gemm(m, n, k, a.ptr(), b.ptr(), c.ptr(), true);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 1.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      ASSERT_NEAR(c[i * n + j], acc, 1e-12);
    }
}

TEST(InstanceNorm, ZeroMeanUnitVariancePerChannel) {
  std::mt19937_64 rng(6);
  const TensorD x = TensorD::normal(Shape{2, 3, 5, 5}, 4.0, 3.0, rng);
  const auto r = instance_norm(x, TensorD::ones(Shape{3}), TensorD::zeros(Shape{3}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c) {
      double m = 0, v = 0;
      for (std::size_t i = 0; i < 25; ++i) m += r.output[(n * 3 + c) * 25 + i];
      m /= 25;
      for (std::size_t i = 0; i < 25; ++i) v += std::pow(r.output[(n * 3 + c) * 25 + i] - m, 2);
      EXPECT_NEAR(m, 0, 1e-12);
      EXPECT_NEAR(v / 25, 1, 1e-5);  // eps = 1e-5 in the denominator
    }
}

TEST(Activations, LeakyReluAndTanh) {
  const TensorD x(Shape{3}, std::vector<double>{-2, 0, 3});
  const auto lr = activate(x, Activation::leaky_relu, 0.2);
  EXPECT_DOUBLE_EQ(lr[0], -0.4);
  EXPECT_DOUBLE_EQ(lr[2], 3);
  const auto th = activate(x, Activation::tanh);
  EXPECT_DOUBLE_EQ(th[0], std::tanh(-2.0));
}

TEST(Reductions, MeansAccumulateInDouble) {
  // 2^24 + 1 is not representable in float; a float accumulator would drift.
  Tensor a(Shape{1 << 20}, 1.0f);
  a[0] = 16.0f;
  EXPECT_NEAR(mean(a), (16.0 + (1 << 20) - 1) / (1 << 20), 1e-7);
}

TEST(Parallel, ConvIsBitwiseIdenticalAcrossThreadCounts) {
  std::mt19937_64 rng(8);
  const Tensor x = Tensor::uniform(Shape{2, 16, 16, 16}, -1, 1, rng);
  const Tensor w = Tensor::uniform(Shape{32, 16, 3, 3}, -1, 1, rng);
  const Tensor b = Tensor::uniform(Shape{32}, -1, 1, rng);
  const ConvSpec spec{1, 1, 0, PadMode::zeros};
  set_thread_count(0);
  const Tensor strict = conv2d(x, w, b, spec);
  set_thread_count(4);
  const Tensor threaded = conv2d(x, w, b, spec);
  set_thread_count(0);
  EXPECT_TRUE(strict == threaded);
}

TEST(Parallel, StaticPartitionVisitsEachIndexOnce) {
  set_thread_count(3);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  set_thread_count(0);
  for (int h : hits) ASSERT_EQ(h, 1);
}

}  // namespace
