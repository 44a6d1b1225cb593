#include <gtest/gtest.h>

#include <cmath>

#include "pol/analysis.hpp"
#include "pol/inference.hpp"
#include "pol/parallel.hpp"
#include "pol/synth.hpp"
#include "pol/training.hpp"

namespace {

using namespace pol;

ModelConfig tiny() {
  ModelConfig c;
  c.image_size = 24;
  c.embed_channels = 4;
  c.expansion = 2;
  c.disc_base = 4;
  return c;
}

struct Data {
  ImageSet clean_a, a, b, eval_clean, eval_noisy;
};

const Data& data() {
  static const Data d = [] {
    Data out;
    const SceneOptions o{24, 2};
    out.clean_a = from_images(render_scenes(6, 1, o));
    DegradationSpec s;
    s.seed = 2;
    out.a = degrade_set(out.clean_a, s);
    out.b = from_images(render_scenes(6, 100, o));
    out.eval_clean = from_images(render_scenes(3, 500, o));
    s.seed = 3;
    out.eval_noisy = degrade_set(out.eval_clean, s);
    return out;
  }();
  return d;
}

TrainConfig quick(int n_tr, int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 2;
  t.seed = 5;
  t.schedule.n_tr = n_tr;
  return t;
}

TEST(Pretrain, LossDecreasesAndLeavesParametersTrainable) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  PretrainConfig pc;
  pc.epochs = 6;
  pc.batch_size = 3;
  const auto hist = pretrain_autoencoder(m.ae, data().b, pc, 7);
  ASSERT_EQ(hist.size(), 6u);
  EXPECT_LT(hist.back().loss, hist.front().loss);
  for (auto* p : m.ae.parameters()) EXPECT_FALSE(p->frozen);
}

TEST(Pretrain, CallbackCanStopEarly) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  PretrainConfig pc;
  pc.epochs = 5;
  const auto hist = pretrain_autoencoder(m.ae, data().b, pc, 7, [](const PretrainEpoch& e) { return e.epoch < 1; });
  EXPECT_EQ(hist.size(), 2u);
}

TEST(Train, AutoencoderStaysFrozenAndScheduleIsFollowed) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  const auto before = parameter_hash(m.ae.parameters());
  const auto gen_before = parameter_hash(m.generator_parameters());
  const auto hist = train_unpaired(m, data().a, data().b, quick(3, 4));
  ASSERT_EQ(hist.size(), 4u);
  EXPECT_EQ(parameter_hash(m.ae.parameters()), before);
  EXPECT_NE(parameter_hash(m.generator_parameters()), gen_before);
  for (auto* p : m.ae.parameters()) EXPECT_TRUE(p->frozen);
  const int expect[] = {1, 2, 3, 3};
  for (std::size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(hist[e].n_min, expect[e]);
    EXPECT_EQ(hist[e].n_max, expect[e]);
    EXPECT_EQ(hist[e].n_hist[static_cast<std::size_t>(expect[e])], 3u);  // 6 images / batch 2
    EXPECT_TRUE(std::isfinite(hist[e].loss_g));
    EXPECT_GT(hist[e].grad_norm_g, 0.0);
  }
}

TEST(Train, RandomRangeAfterWarmup) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  TrainConfig t = quick(3, 6);
  t.batch_size = 1;
  t.schedule.range_lo = 1;
  t.schedule.range_hi = 3;
  const auto hist = train_unpaired(m, data().a, data().b, t);
  std::size_t distinct = 0;
  std::vector<std::size_t> total(4, 0);
  for (std::size_t e = 3; e < 6; ++e)
    for (std::size_t n = 0; n < 4; ++n) total[n] += hist[e].n_hist[n];
  for (std::size_t n = 1; n <= 3; ++n) distinct += total[n] > 0;
  EXPECT_EQ(total[0], 0u);
  EXPECT_GE(distinct, 2u);
}

TEST(Train, SameSeedSameWeights) {
  set_thread_count(0);
  PolModel<float> a = build_model<float>(tiny(), 1);
  PolModel<float> b = build_model<float>(tiny(), 1);
  train_unpaired(a, data().a, data().b, quick(2, 2));
  train_unpaired(b, data().a, data().b, quick(2, 2));
  EXPECT_EQ(parameter_hash(a.parameters()), parameter_hash(b.parameters()));
}

TEST(Train, RejectsShortWarmupAndMissingBlocks) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  EXPECT_THROW(train_unpaired(m, data().a, data().b, quick(4, 2)), ConfigError);
  TrainConfig t = quick(3, 3);
  t.share_weights = false;
  EXPECT_THROW(train_unpaired(m, data().a, data().b, t), ConfigError);
  PolModel<float> ind = build_model<float>(tiny(), 1, false, 3);
  EXPECT_NO_THROW(train_unpaired(ind, data().a, data().b, t));
}

TEST(Train, NaNAbortsWithLocation) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  m.gen_ab.blocks[0].conv1.bias.value[0] = std::nanf("");
  try {
    train_unpaired(m, data().a, data().b, quick(1, 1));
    FAIL() << "NaN did not abort";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0 batch 0"), std::string::npos) << e.what();
  }
}

TEST(Train, EvalPsnrReportedPerEpoch) {
  PolModel<float> m = build_model<float>(tiny(), 1);
  const auto hist = train_unpaired(m, data().a, data().b, quick(1, 2), EvalPair{&data().eval_clean, &data().eval_noisy});
  for (const auto& s : hist) EXPECT_TRUE(std::isfinite(s.psnr));
}

class Inference : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = new PolModel<float>(build_model<float>(tiny(), 11));
    train_unpaired(*model_, data().a, data().b, quick(2, 2));
  }
  static void TearDownTestSuite() { delete model_; }
  static PolModel<float>* model_;
};
PolModel<float>* Inference::model_ = nullptr;

TEST(ArgmaxFirst, SmallestIndexWinsTies) {
  EXPECT_EQ(argmax_first({0.1, 0.5, 0.5, 0.2}), 1u);
  EXPECT_EQ(argmax_first({0.7}), 0u);
}

TEST_F(Inference, FixedMatchesGeneratorForward) {
  auto& m = *model_;
  const ImageU8& x = data().eval_noisy.images[0];
  const InferResult r = infer(m.ae, m.gen_ab, m.disc_b, x, StoppingPolicy::fixed_n(2));
  EXPECT_EQ(r.n_star, 2);
  EXPECT_EQ(r.score_trace.size(), 3u);
  EXPECT_TRUE(r.image == to_image(generator_forward(m.ae, m.gen_ab, to_tensor<float>(x), 2)));
}

TEST_F(Inference, AdaptivePicksMostRealisticStep) {
  auto& m = *model_;
  const InferResult r = infer(m.ae, m.gen_ab, m.disc_b, data().eval_noisy.images[1], StoppingPolicy::adaptive(5));
  EXPECT_EQ(static_cast<std::size_t>(r.n_star), argmax_first(r.score_trace));
  for (double s : r.score_trace) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST_F(Inference, OracleDominatesEveryFixedN) {
  auto& m = *model_;
  for (std::size_t i = 0; i < data().eval_noisy.size(); ++i) {
    const auto& ref = data().eval_clean.images[i];
    const InferResult o = infer(m.ae, m.gen_ab, m.disc_b, data().eval_noisy.images[i], StoppingPolicy::oracle(4), &ref);
    for (double p : o.psnr_trace) EXPECT_GE(psnr(o.image, ref), p);
  }
  EXPECT_THROW(infer(m.ae, m.gen_ab, m.disc_b, data().eval_noisy.images[0], StoppingPolicy::oracle(4)), ConfigError);
}

TEST_F(Inference, EvaluateZeroIsReconstruction) {
  auto& m = *model_;
  const EvalReport r =
      evaluate(m.ae, m.gen_ab, m.disc_b, data().eval_clean, data().eval_clean, StoppingPolicy::fixed_n(0));
  double want = 0;
  for (const auto& img : data().eval_clean.images)
    want += psnr(to_image(decode(m.ae, encode(m.ae, to_tensor<float>(img)))), img);
  EXPECT_NEAR(r.mean_psnr, want / 3.0, 1e-9);
  EXPECT_EQ(r.mean_n_star, 0.0);
}

TEST_F(Inference, PolicyOrderingOnEvalSet) {
  auto& m = *model_;
  const auto& c = data().eval_clean;
  const auto& d = data().eval_noisy;
  const double fixed = evaluate(m.ae, m.gen_ab, m.disc_b, c, d, StoppingPolicy::fixed_n(2)).mean_psnr;
  const double oracle = evaluate(m.ae, m.gen_ab, m.disc_b, c, d, StoppingPolicy::oracle(2)).mean_psnr;
  EXPECT_GE(oracle, fixed);
}

TEST_F(Inference, SweepMatchesFixedInference) {
  auto& m = *model_;
  const ImageU8& x = data().eval_noisy.images[2];
  const auto imgs = modulation_sweep(m.ae, m.gen_ab, x, {0, 1, 3});
  ASSERT_EQ(imgs.size(), 3u);
  EXPECT_TRUE(imgs[2] == infer(m.ae, m.gen_ab, m.disc_b, x, StoppingPolicy::fixed_n(3)).image);
  EXPECT_THROW(modulation_sweep(m.ae, m.gen_ab, x, {3, 1}), ConfigError);
}

TEST_F(Inference, ComposeInEmbeddingAndImageSpace) {
  auto& m = *model_;
  const ImageU8& x = data().eval_noisy.images[0];
  const ImageU8 only_first = compose_transforms(m.ae, m.gen_ab, m.gen_ba, x, ComposeMode::embedding, 2, 0);
  EXPECT_TRUE(only_first == infer(m.ae, m.gen_ab, m.disc_b, x, StoppingPolicy::fixed_n(2)).image);
  const ImageU8 emb = compose_transforms(m.ae, m.gen_ab, m.gen_ab, x, ComposeMode::embedding, 1, 1);
  EXPECT_TRUE(emb == infer(m.ae, m.gen_ab, m.disc_b, x, StoppingPolicy::fixed_n(2)).image);
  const ImageU8 img = compose_transforms(m.ae, m.gen_ab, m.gen_ba, x, ComposeMode::image, 1, 1);
  EXPECT_EQ(img.width, x.width);
}

TEST(InitSweep, RowCountAndDeterminism) {
  set_thread_count(0);
  PolModel<float> pre = build_model<float>(tiny(), 1);
  InitSweepSetup s;
  s.pretrained = &pre.ae;
  s.model = tiny();
  s.train = quick(2, 2);
  s.domain_a = &data().a;
  s.domain_b = &data().b;
  s.eval = EvalPair{&data().eval_clean, &data().eval_noisy};
  s.epochs = 3;
  const auto rows = init_scale_sweep(s, {0.1, 1.0});
  EXPECT_EQ(rows.size(), 2u * 2 * 3);
  const auto again = init_scale_sweep(s, {0.1, 1.0});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].scale, again[i].scale);
    EXPECT_TRUE(rows[i].psnr == again[i].psnr || (std::isnan(rows[i].psnr) && std::isnan(again[i].psnr)));
  }
}

}  // namespace
