#include <gtest/gtest.h>

#include <cmath>

#include "pol/losses.hpp"
#include "pol/training.hpp"

namespace {

using namespace pol;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

TEST(AdversarialLoss, LogFormMatchesDefinition) {
  Tape<double> t(false);
  const TensorD real(Shape{1, 1, 1, 3}, std::vector<double>{0.5, -1.0, 2.0});
  const TensorD fake(Shape{1, 1, 1, 3}, std::vector<double>{-0.3, 0.7, 0.0});
  double want = 0;
  for (double z : real.data()) want -= std::log(sigmoid(z)) / 3;
  for (double z : fake.data()) want -= std::log(1 - sigmoid(z)) / 3;
  EXPECT_NEAR(discriminator_loss_from_logits(t.constant(real), t.constant(fake)).value().item(), want, 1e-12);

  double gen = 0;
  for (double z : fake.data()) gen -= std::log(sigmoid(z)) / 3;
  EXPECT_NEAR(generator_adv_loss_from_logits(t.constant(fake)).value().item(), gen, 1e-12);
}

TEST(AdversarialLoss, LeastSquaresForm) {
  Tape<double> t(false);
  const TensorD real(Shape{2}, std::vector<double>{0.5, 1.5});
  const TensorD fake(Shape{2}, std::vector<double>{0.2, -0.4});
  const double want = (0.25 + 0.25) / 2 + (0.04 + 0.16) / 2;
  EXPECT_NEAR(discriminator_loss_from_logits(t.constant(real), t.constant(fake), AdversarialMode::lsgan)
                  .value()
                  .item(),
              want, 1e-12);
  EXPECT_NEAR(generator_adv_loss_from_logits(t.constant(fake), AdversarialMode::lsgan).value().item(),
              (0.64 + 1.96) / 2, 1e-12);
}

TEST(AdversarialLoss, ChanceLevelIsTwoLogTwo) {
  Tape<double> t(false);
  const TensorD zero(Shape{4});
  EXPECT_NEAR(discriminator_loss_from_logits(t.constant(zero), t.constant(zero)).value().item(), 2 * std::log(2.0),
              1e-12);
}

TEST(AdversarialLoss, NonFiniteLogitsThrow) {
  Tape<double> t(false);
  const TensorD bad(Shape{1}, std::vector<double>{std::nan("")});
  EXPECT_THROW(generator_adv_loss_from_logits(t.constant(bad)), NumericError);
}

TEST(TotalLoss, DefaultWeights) {
  const LossWeights w;
  EXPECT_DOUBLE_EQ(w.lambda_adv, 1.0);
  EXPECT_DOUBLE_EQ(w.lambda_cyc, 10.0);
  EXPECT_DOUBLE_EQ(w.lambda_id, 5.0);
  EXPECT_DOUBLE_EQ(total_generator_loss(0.5, 0.1, 0.2, w), 0.5 + 1.0 + 1.0);
}

TEST(TotalLoss, NegativeWeightRejected) {
  LossWeights w;
  w.lambda_cyc = -1;
  EXPECT_THROW(w.validate(), ConfigError);
}

ModelConfig tiny() {
  ModelConfig c;
  c.image_size = 24;
  c.embed_channels = 4;
  c.expansion = 1;
  c.disc_base = 4;
  return c;
}

// With zero compositions both generators are the autoencoder, so cycle and
// identity reduce to reconstruction errors.
TEST(CycleIdentity, ZeroCompositionsReduceToReconstruction) {
  PolModel<double> m = build_model<double>(tiny(), 3);
  std::mt19937_64 rng(4);
  const TensorD a = TensorD::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  const TensorD b = TensorD::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  const TensorD ra = decode(m.ae, encode(m.ae, a));
  const TensorD rb = decode(m.ae, encode(m.ae, b));
  const TensorD rra = decode(m.ae, encode(m.ae, ra));
  const TensorD rrb = decode(m.ae, encode(m.ae, rb));
  Tape<double> t(false);
  const double cyc = cycle_loss(t, m.ae, m.gen_ab, m.gen_ba, t.constant(a), t.constant(b), 0).value().item();
  EXPECT_NEAR(cyc, l1_mean(rra, a) + l1_mean(rrb, b), 1e-12);
  const double id = identity_loss(t, m.ae, m.gen_ab, m.gen_ba, t.constant(a), t.constant(b), 0).value().item();
  EXPECT_NEAR(id, l2_mean(ra, a) + l2_mean(rb, b), 1e-12);
}

TEST(GeneratorObjective, TotalIsWeightedSum) {
  PolModel<double> m = build_model<double>(tiny(), 5);
  std::mt19937_64 rng(6);
  const TensorD a = TensorD::uniform(Shape{2, 3, 24, 24}, -1, 1, rng);
  const TensorD b = TensorD::uniform(Shape{2, 3, 24, 24}, -1, 1, rng);
  const LossWeights w{0.7, 3.0, 2.0};
  Tape<double> t;
  auto obj = generator_objective(t, m, t.constant(a), t.constant(b), 2, w, AdversarialMode::log);
  const double adv = obj.adv.value().item(), cyc = obj.cyc.value().item(), id = obj.id.value().item();
  EXPECT_NEAR(obj.total.value().item(), 0.7 * adv + 3.0 * cyc + 2.0 * id, 1e-12);

  // Same terms through the standalone loss functions.
  Tape<double> t2(false);
  EXPECT_NEAR(cycle_loss(t2, m.ae, m.gen_ab, m.gen_ba, t2.constant(a), t2.constant(b), 2).value().item(), cyc, 1e-12);
  EXPECT_NEAR(identity_loss(t2, m.ae, m.gen_ab, m.gen_ba, t2.constant(a), t2.constant(b), 2).value().item(), id,
              1e-12);
  EXPECT_EQ(obj.fake_b.shape(), a.shape());
}

TEST(GeneratorObjective, DoesNotTouchDiscriminatorGrads) {
  PolModel<double> m = build_model<double>(tiny(), 7);
  std::mt19937_64 rng(8);
  const TensorD a = TensorD::uniform(Shape{1, 3, 24, 24}, -1, 1, rng);
  Tape<double> t;
  auto obj = generator_objective(t, m, t.constant(a), t.constant(a), 1, LossWeights{}, AdversarialMode::log);
  t.backward(obj.total);
  EXPECT_EQ(grad_norm(m.discriminator_parameters()), 0.0);
  EXPECT_GT(grad_norm(m.generator_parameters()), 0.0);
}

}  // namespace
