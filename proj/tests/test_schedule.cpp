#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <vector>

#include "pol/optim.hpp"
#include "pol/schedule.hpp"

namespace {

using namespace pol;

TEST(WarmupLaw, MatchesClosedFormOnGrid) {
  for (int step : {1, 2, 4, 8, 16})
    for (int n_tr : {1, 4, 16, 30})
      for (int e = 0; e <= 100; ++e) ASSERT_EQ(warmup_compositions(e, step, n_tr), std::min(e / step + 1, n_tr));
}

TEST(WarmupLaw, Examples) {
  EXPECT_EQ(warmup_compositions(0, 1, 4), 1);
  EXPECT_EQ(warmup_compositions(3, 1, 4), 4);
  EXPECT_EQ(warmup_compositions(7, 4, 30), 2);
}

TEST(Sampler, ProgressiveWithoutRangeHoldsNtr) {
  CompositionSchedule s;
  s.n_tr = 4;
  CompositionSampler smp(s, 1);
  std::vector<int> got;
  for (int e = 0; e < 7; ++e) got.push_back(smp.compositions_for(e, 0));
  EXPECT_EQ(got, (std::vector<int>{1, 2, 3, 4, 4, 4, 4}));
}

TEST(Sampler, FixedScheduleStartsAtNtr) {
  CompositionSchedule s;
  s.n_tr = 16;
  s.progressive = false;
  CompositionSampler smp(s, 1);
  EXPECT_EQ(smp.compositions_for(0, 0), 16);
}

TEST(Sampler, EpochGranularityDrawsOncePerEpoch) {
  CompositionSchedule s;
  s.n_tr = 30;
  s.range_lo = 20;
  s.range_hi = 30;
  s.randomize_per = RandomizePer::epoch;
  CompositionSampler smp(s, 3);
  for (int e = 30; e < 40; ++e) {
    const int first = smp.compositions_for(e, 0);
    for (int b = 1; b < 5; ++b) ASSERT_EQ(smp.compositions_for(e, b), first);
  }
}

TEST(Sampler, StateRoundTrip) {
  CompositionSchedule s;
  s.n_tr = 8;
  s.range_lo = 1;
  s.range_hi = 8;
  CompositionSampler a(s, 9);
  for (int b = 0; b < 10; ++b) a.compositions_for(8, b);
  CompositionSampler b(s, 123);
  b.set_rng_state(a.rng_state());
  for (int i = 10; i < 30; ++i) ASSERT_EQ(a.compositions_for(8, i), b.compositions_for(8, i));
}

TEST(Sampler, InvalidRangesRejected) {
  CompositionSchedule s;
  s.n_tr = 30;
  s.range_lo = 25;
  s.range_hi = 20;
  EXPECT_THROW(s.validate(), ConfigError);
  s.range_lo = 20;
  s.range_hi = 31;  // must equal n_tr
  EXPECT_THROW(s.validate(), ConfigError);
  s.range_hi = 30;
  EXPECT_NO_THROW(s.validate());
}

double chi_square_p(const std::vector<long>& counts, double expected) {
  double stat = 0;
  for (long c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

TEST(Sampler, RangeDrawsAreUniform) {
  CompositionSchedule s;
  s.n_tr = 30;
  s.range_lo = 20;
  s.range_hi = 30;
  CompositionSampler smp(s, 2024);
  std::vector<long> counts(11, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const int n = smp.compositions_for(30, i);
    ASSERT_GE(n, 20);
    ASSERT_LE(n, 30);
    ++counts[static_cast<std::size_t>(n - 20)];
  }
  for (long c : counts) EXPECT_GT(c, 0);
  EXPECT_GT(chi_square_p(counts, draws / 11.0), 0.01);
}

TEST(Sampler, ChiSquareDetectsBias) {
  // Sanity check of the test itself: a visibly skewed histogram fails.
  std::vector<long> counts(11, 900);
  counts[0] = 1000;
  counts[10] = 1100;
  EXPECT_LT(chi_square_p(counts, 10000 / 11.0), 0.01);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter<double> p("p", TensorD(Shape{2}, std::vector<double>{1.0, -1.0}));
  p.grad = TensorD(Shape{2}, std::vector<double>{0.3, -5.0});
  Adam<double> opt(AdamConfig{0.1, 0.5, 0.999, 1e-8});
  opt.step({&p});
  // Bias-corrected first step is lr * sign(g).
  EXPECT_NEAR(p.value[0], 0.9, 1e-6);
  EXPECT_NEAR(p.value[1], -0.9, 1e-6);
  EXPECT_EQ(p.grad[0], 0.0);
}

TEST(Adam, SkipsFrozenAndRejectsNaN) {
  Parameter<double> frozen("f", TensorD(Shape{1}, 1.0), true);
  frozen.grad[0] = 1.0;
  Parameter<double> bad("b", TensorD(Shape{1}, 1.0));
  bad.grad[0] = std::nan("");
  Adam<double> opt;
  opt.step({&frozen});
  EXPECT_EQ(frozen.value[0], 1.0);
  EXPECT_THROW(opt.step({&bad}), NumericError);
  EXPECT_EQ(bad.value[0], 1.0);
}

TEST(Adam, MinimizesQuadratic) {
  Parameter<double> p("p", TensorD(Shape{1}, 5.0));
  Adam<double> opt(AdamConfig{0.05, 0.9, 0.999, 1e-8});
  for (int i = 0; i < 2000; ++i) {
    p.grad[0] = 2 * (p.value[0] - 2.0);
    opt.step({&p});
  }
  EXPECT_NEAR(p.value[0], 2.0, 1e-3);
}

}  // namespace
