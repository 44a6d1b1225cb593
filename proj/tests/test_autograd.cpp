#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pol/gradcheck.hpp"
#include "pol/losses.hpp"
#include "pol/model.hpp"
#include "pol/training.hpp"

namespace {

using namespace pol;

template <typename T>
struct Tol;
template <>
struct Tol<float> {
  static constexpr double eps = 1e-2;
  static constexpr double rel = 1e-3;
};
template <>
struct Tol<double> {
  static constexpr double eps = 1e-6;
  static constexpr double rel = 1e-6;
};

template <typename T>
Parameter<T> random_param(const std::string& name, Shape shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  return Parameter<T>(name, BasicTensor<T>::uniform(shape, static_cast<T>(lo), static_cast<T>(hi), rng));
}

// Values in +-[0.2, 1] keep finite differences away from the relu kink.
template <typename T>
Parameter<T> off_zero_param(const std::string& name, Shape shape, std::mt19937_64& rng) {
  Parameter<T> p = random_param<T>(name, shape, rng, 0.2, 1.0);
  for (std::size_t i = 0; i < p.value.size(); i += 2) p.value[i] = -p.value[i];
  return p;
}

template <typename T>
void expect_grad_ok(const LossBuilder<T>& loss, const ParameterRefs<T>& params) {
  GradCheckOptions o;
  o.eps = Tol<T>::eps;
  const auto rep = finite_diff_check<T>(loss, params, o);
  for (const auto& e : rep.entries) EXPECT_LT(e.max_rel_error, Tol<T>::rel) << e.name;
}

template <typename T>
class Primitives : public ::testing::Test {};
using Precisions = ::testing::Types<float, double>;
TYPED_TEST_SUITE(Primitives, Precisions);

TYPED_TEST(Primitives, Conv2d) {
  using T = TypeParam;
  std::mt19937_64 rng(1);
  auto x = random_param<T>("x", Shape{2, 3, 7, 6}, rng);
  auto w = random_param<T>("w", Shape{4, 3, 3, 3}, rng);
  auto b = random_param<T>("b", Shape{4}, rng);
  for (ConvSpec spec : {ConvSpec{1, 1, 0, PadMode::zeros}, ConvSpec{2, 1, 0, PadMode::reflect}}) {
    const auto dir = BasicTensor<T>::uniform(conv2d_output_shape(x.value.shape(), w.value.shape(), spec), -1, 1, rng);
    expect_grad_ok<T>(
        [&](Tape<T>& t) { return ag::project(ag::conv2d(t.param(x), t.param(w), t.param(b), spec), dir); },
        {&x, &w, &b});
  }
}

TYPED_TEST(Primitives, ConvTranspose2d) {
  using T = TypeParam;
  std::mt19937_64 rng(2);
  auto x = random_param<T>("x", Shape{1, 4, 4, 5}, rng);
  auto w = random_param<T>("w", Shape{4, 3, 3, 3}, rng);
  auto b = random_param<T>("b", Shape{3}, rng);
  const ConvSpec spec{2, 1, 1, PadMode::zeros};
  const auto dir = BasicTensor<T>::uniform(Shape{1, 3, 8, 10}, -1, 1, rng);
  expect_grad_ok<T>(
      [&](Tape<T>& t) { return ag::project(ag::conv_transpose2d(t.param(x), t.param(w), t.param(b), spec), dir); },
      {&x, &w, &b});
}

TYPED_TEST(Primitives, InstanceNorm) {
  using T = TypeParam;
  std::mt19937_64 rng(3);
  auto x = random_param<T>("x", Shape{2, 3, 4, 4}, rng);
  auto g = random_param<T>("gamma", Shape{3}, rng, 0.5, 1.5);
  auto b = random_param<T>("beta", Shape{3}, rng);
  const auto dir = BasicTensor<T>::uniform(x.value.shape(), -1, 1, rng);
  expect_grad_ok<T>(
      [&](Tape<T>& t) { return ag::project(ag::instance_norm(t.param(x), t.param(g), t.param(b)), dir); },
      {&x, &g, &b});
}

TYPED_TEST(Primitives, Activations) {
  using T = TypeParam;
  std::mt19937_64 rng(4);
  auto x = off_zero_param<T>("x", Shape{2, 2, 3, 3}, rng);
  const auto dir = BasicTensor<T>::uniform(x.value.shape(), -1, 1, rng);
  for (Activation a :
       {Activation::identity, Activation::relu, Activation::leaky_relu, Activation::sigmoid, Activation::tanh}) {
    expect_grad_ok<T>([&](Tape<T>& t) { return ag::project(ag::activation(t.param(x), a), dir); }, {&x});
  }
}

TYPED_TEST(Primitives, Elementwise) {
  using T = TypeParam;
  std::mt19937_64 rng(5);
  auto a = random_param<T>("a", Shape{3, 4}, rng);
  auto b = random_param<T>("b", Shape{3, 4}, rng);
  auto c = random_param<T>("c", Shape{3, 4}, rng);
  const auto dir = BasicTensor<T>::uniform(Shape{3, 4}, -1, 1, rng);
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::project(ag::add(t.param(a), t.param(b)), dir); }, {&a, &b});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::project(ag::sub(t.param(a), t.param(b)), dir); }, {&a, &b});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::project(ag::mul(t.param(a), t.param(b)), dir); }, {&a, &b});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::project(ag::scale(t.param(a), T(-2.5)), dir); }, {&a});
  expect_grad_ok<T>(
      [&](Tape<T>& t) {
        return ag::project(ag::weighted_sum<T>({t.param(a), t.param(b), t.param(c)}, {T(1), T(10), T(5)}), dir);
      },
      {&a, &b, &c});
}

TYPED_TEST(Primitives, Reductions) {
  using T = TypeParam;
  std::mt19937_64 rng(6);
  auto a = random_param<T>("a", Shape{2, 3, 4}, rng);
  auto b = random_param<T>("b", Shape{2, 3, 4}, rng);
  // Keep a - b off zero for the L1 kink.
  for (std::size_t i = 0; i < a.value.size(); ++i) b.value[i] = a.value[i] + (i % 2 ? T(0.3) : T(-0.4));
  auto use_mul = [&](Tape<T>& t) { return ag::mul(t.param(a), t.param(a)); };
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::sum(use_mul(t)); }, {&a});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::mean(use_mul(t)); }, {&a});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::l1_mean(t.param(a), t.param(b)); }, {&a, &b});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::l2_mean(t.param(a), t.param(b)); }, {&a, &b});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::softplus_mean(t.param(a), T(1)); }, {&a});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::softplus_mean(t.param(a), T(-1)); }, {&a});
  expect_grad_ok<T>([&](Tape<T>& t) { return ag::square_error_mean(t.param(a), T(1)); }, {&a});
}

TEST(Softplus, StableForLargeLogits) {
  Tape<double> t(false);
  const TensorD big(Shape{2}, std::vector<double>{800.0, -800.0});
  EXPECT_NEAR(ag::softplus_mean(t.constant(big), 1.0).value().item(), 400.0, 1e-9);
  EXPECT_NEAR(ag::softplus_mean(t.constant(big), -1.0).value().item(), 400.0, 1e-9);
}

TEST(Tape, ParameterUsedTwiceAccumulatesBothPaths) {
  Parameter<double> p("p", TensorD(Shape{1}, 3.0));
  Tape<double> t;
  const Var<double> v = t.param(p);
  t.backward(ag::sum(ag::mul(v, v)));  // d(p^2)/dp = 2p
  EXPECT_DOUBLE_EQ(p.grad[0], 6.0);
}

TEST(Tape, FrozenParameterGetsNoGradient) {
  Parameter<double> p("p", TensorD(Shape{1}, 3.0), true);
  Parameter<double> q("q", TensorD(Shape{1}, 2.0));
  Tape<double> t;
  t.backward(ag::sum(ag::mul(t.param(p, !p.frozen), t.param(q))));
  EXPECT_DOUBLE_EQ(p.grad[0], 0.0);
  EXPECT_DOUBLE_EQ(q.grad[0], 3.0);
}

TEST(Tape, NoGradTapeRecordsNothing) {
  Parameter<double> p("p", TensorD(Shape{4}, 1.0));
  Tape<double> t(false);
  const Var<double> y = ag::sum(ag::mul(t.param(p), t.param(p)));
  EXPECT_FALSE(y.requires_grad());
}

TEST(GradCheck, FlagsAWrongGradient) {
  // mul against a detached copy of itself: backward sees p, the check sees p^2.
  Parameter<double> p("p", TensorD(Shape{3}, std::vector<double>{1, 2, 3}));
  const auto rep = finite_diff_check<double>(
      [&](Tape<double>& t) {
        Var<double> v = t.param(p);
        return ag::sum(ag::mul(v, t.constant(p.value)));
      },
      {&p});
  EXPECT_GT(rep.max_rel_error(), 0.3);
}

ModelConfig tiny_model() {
  ModelConfig c;
  c.image_size = 24;
  c.embed_channels = 4;
  c.expansion = 2;
  c.disc_base = 4;
  return c;
}

// The whole generator objective, including the frozen encoder/decoder path
// and the discriminator reads, against central differences. The f32 graph is
// checked against differences of the same weights in f64.
template <typename T>
Var<T> objective(Tape<T>& t, PolModel<T>& m, const BasicTensor<T>& a, const BasicTensor<T>& b, int n) {
  return generator_objective(t, m, t.constant(a), t.constant(b), n, LossWeights{}, AdversarialMode::log).total;
}

void check_generator_graph_f64(int n) {
  PolModel<double> m = build_model<double>(tiny_model(), 21);
  m.ae.set_frozen(true);
  std::mt19937_64 rng(22);
  const auto a = TensorD::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  const auto b = TensorD::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  const LossBuilder<double> loss = [&](Tape<double>& t) { return objective(t, m, a, b, n); };
  Tape<double> probe(false);
  GradCheckOptions o;
  o.eps = Tol<double>::eps;
  o.max_coords = 24;
  o.abs_floor = central_difference_noise<double>(loss(probe).value().item(), o.eps);
  const auto rep = finite_diff_check<double>(loss, m.generator_parameters(), o);
  for (const auto& e : rep.entries) EXPECT_LT(e.max_rel_error, Tol<double>::rel) << e.name << " n=" << n;
}

void check_generator_graph_f32(int n) {
  PolModel<float> m = build_model<float>(tiny_model(), 21);
  PolModel<double> ref = build_model<double>(tiny_model(), 21);
  m.ae.set_frozen(true);
  ref.ae.set_frozen(true);
  {
    const auto src = m.parameters();
    const auto dst = ref.parameters();
    for (std::size_t i = 0; i < src.size(); ++i)
      for (std::size_t k = 0; k < src[i]->value.size(); ++k) dst[i]->value[k] = src[i]->value[k];
  }
  std::mt19937_64 rng(22);
  const auto a = Tensor::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  const auto b = Tensor::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  const TensorD ad = a.cast<double>(), bd = b.cast<double>();
  const LossBuilder<float> loss = [&](Tape<float>& t) { return objective(t, m, a, b, n); };
  const LossBuilder<double> ref_loss = [&](Tape<double>& t) { return objective(t, ref, ad, bd, n); };
  Tape<double> probe(false);
  GradCheckOptions o;
  o.eps = Tol<double>::eps;
  o.max_coords = 24;
  o.abs_floor = central_difference_noise<double>(ref_loss(probe).value().item(), o.eps);
  const auto rep = finite_diff_check_f64_reference(loss, m.generator_parameters(), ref_loss,
                                                   ref.generator_parameters(), o);
  for (const auto& e : rep.entries) EXPECT_LT(e.max_rel_error, Tol<float>::rel) << e.name << " n=" << n;
}

class GeneratorGraph : public ::testing::TestWithParam<int> {};

TEST_P(GeneratorGraph, Double) { check_generator_graph_f64(GetParam()); }
TEST_P(GeneratorGraph, Float) { check_generator_graph_f32(GetParam()); }

INSTANTIATE_TEST_SUITE_P(Compositions, GeneratorGraph, ::testing::Values(1, 2, 4, 8));

// Shared-weight gradient of f^n equals the sum over an unrolled chain of n
// independent copies holding the same values.
class WeightSharing : public ::testing::TestWithParam<int> {};

TEST_P(WeightSharing, SharedEqualsSumOfUnrolledCopies) {
  const int n = GetParam();
  ModelConfig c = tiny_model();
  std::mt19937_64 rng(31);
  Translator<double> shared = make_translator<double>(c, "s", true, 1, rng);
  Translator<double> unrolled = make_translator<double>(c, "u", false, static_cast<std::size_t>(n), rng);
  for (auto& blk : unrolled.blocks) blk.copy_weights_from(shared.blocks[0]);

  const auto e = TensorD::uniform(Shape{2, c.embed_channels, 4, 4}, -1, 1, rng);
  const auto dir = TensorD::uniform(e.shape(), -1, 1, rng);
  {
    Tape<double> t;
    t.backward(ag::project(shared.iterate(t, t.constant(e), n), dir));
  }
  {
    Tape<double> t;
    t.backward(ag::project(unrolled.iterate(t, t.constant(e), n), dir));
  }
  const auto sp = shared.parameters();
  for (std::size_t i = 0; i < sp.size(); ++i) {
    TensorD summed(sp[i]->grad.shape());
    for (auto& blk : unrolled.blocks) summed = add(summed, blk.parameters()[i]->grad);
    EXPECT_LT(max_abs_diff(sp[i]->grad, summed), 1e-5) << sp[i]->name;
  }
}

INSTANTIATE_TEST_SUITE_P(Compositions, WeightSharing, ::testing::Values(2, 4, 8));

}  // namespace
