#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "wtconv/toytrain.hpp"

using namespace wtconv;

namespace {

FreqDataset<double> small_set(FreqTask task, std::uint64_t seed, double noise = 0.2,
                              std::int64_t count = 16) {
  return generate_dataset<double>({task, count, 16, noise, seed});
}

double laplacian_energy(const Tensor4d& images, std::int64_t i) {
  DepthwiseKernel<double> lap(1, 3, 3, 0.0);
  lap(0, 0, 1) = lap(0, 1, 0) = lap(0, 1, 2) = lap(0, 2, 1) = 1.0;
  lap(0, 1, 1) = -4.0;
  Tensor4d one(1, 1, images.h(), images.w());
  std::copy_n(images.plane(i, 0), images.h() * images.w(), one.plane(0, 0));
  const Tensor4d r = depthwise_conv(one, lap);
  return dot(r, r) / static_cast<double>(r.size());
}

}  // namespace

TEST(Dataset, DeterministicPerSeedAndBounded) {
  for (FreqTask task : {FreqTask::Separable, FreqTask::LongWavelength}) {
    const auto a = small_set(task, 3), b = small_set(task, 3), c = small_set(task, 4);
    EXPECT_TRUE((a.images.values() == b.images.values()).all());
    EXPECT_FALSE((a.images.values() == c.images.values()).all());
    EXPECT_LE(a.images.values().abs().maxCoeff(), 1.0);
    for (std::int64_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.labels[i], i % 2);
  }
}

TEST(Dataset, ImageDependsOnlyOnSeedAndIndex) {
  const auto a = small_set(FreqTask::Separable, 7, 0.2, 4);
  const auto b = small_set(FreqTask::Separable, 7, 0.2, 10);
  EXPECT_TRUE(std::equal(a.images.plane(3, 0), a.images.plane(3, 0) + 256, b.images.plane(3, 0)));
}

TEST(Dataset, RejectsBadSpecs) {
  EXPECT_THROW(generate_dataset<double>({FreqTask::Separable, 0, 16, 0.0, 1}), ParamError);
  EXPECT_THROW(generate_dataset<double>({FreqTask::Separable, 3, 16, 0.0, 1}), ParamError);
  EXPECT_THROW(generate_dataset<double>({FreqTask::Separable, 4, 1, 0.0, 1}), ParamError);
  EXPECT_THROW(generate_dataset<double>({FreqTask::Separable, 4, 16, 1.0, 1}), ParamError);
}

TEST(Dataset, SeparableTaskSplitsOnLaplacianEnergyWithoutNoise) {
  const auto ds = generate_dataset<double>({FreqTask::Separable, 64, 32, 0.0, 5});
  double smooth_max = 0, texture_min = 1e300;
  for (std::int64_t i = 0; i < ds.size(); ++i) {
    const double e = laplacian_energy(ds.images, i);
    if (ds.labels[i] == 0)
      smooth_max = std::max(smooth_max, e);
    else
      texture_min = std::min(texture_min, e);
  }
  EXPECT_LT(smooth_max, texture_min);
}

TEST(Train, ZeroLearningRateKeepsLossConstant) {
  const auto tr = small_set(FreqTask::Separable, 1), te = small_set(FreqTask::Separable, 2);
  const auto m = make_toy_model<double>(MixerKind::WTConv, 2, 3, 1, 1);
  const auto r = train(m, tr, te, {3, 0.0, 8, 1});
  ASSERT_EQ(r.log.size(), 4u);
  for (const auto& s : r.log) EXPECT_EQ(s.loss, r.log[0].loss);
  EXPECT_NEAR(r.log[0].loss, std::log(2.0), 1e-15);  // zero head
}

TEST(Train, FullBatchLossDecreases) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto tr = small_set(FreqTask::Separable, seed), te = small_set(FreqTask::Separable, seed + 1);
    const auto m = make_toy_model<double>(MixerKind::WTConv, 2, 3, 2, seed);
    const auto r = train(m, tr, te, {8, 1e-2, tr.size(), seed});
    for (std::size_t e = 1; e < r.log.size(); ++e)
      EXPECT_LT(r.log[e].loss, r.log[e - 1].loss) << "seed " << seed << " epoch " << e;
  }
}

TEST(Train, DeterministicRerun) {
  const auto tr = small_set(FreqTask::LongWavelength, 1), te = small_set(FreqTask::LongWavelength, 2);
  const auto m = make_toy_model<double>(MixerKind::WTConv, 2, 3, 2, 9);
  const auto a = train(m, tr, te, {3, 0.05, 4, 11});
  const auto b = train(m, tr, te, {3, 0.05, 4, 11});
  EXPECT_EQ(training_log_csv(a.log), training_log_csv(b.log));
  EXPECT_TRUE((a.model.mixer.w_levels[1].values() == b.model.mixer.w_levels[1].values()).all());
}

TEST(Train, PlainMixerHasNoLevels) {
  const auto m = make_toy_model<double>(MixerKind::Plain, 4, 3, 2, 1);
  EXPECT_EQ(m.mixer.levels, 0);
  EXPECT_EQ(m.head.weights.cols(), 4);
  EXPECT_EQ(m.head.weights.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Train, DivergenceRaisesWithLastFiniteState) {
  const auto tr = small_set(FreqTask::Separable, 1), te = small_set(FreqTask::Separable, 2);
  const auto m = make_toy_model<double>(MixerKind::WTConv, 2, 3, 1, 1);
  try {
    train(m, tr, te, {20, 1e200, 16, 1});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError<double>& e) {
    EXPECT_FALSE(e.last_finite().log.empty());
    EXPECT_TRUE(std::isfinite(e.last_finite().log.back().loss));
  }
}

TEST(Train, RejectsBadConfig) {
  const auto tr = small_set(FreqTask::Separable, 1), te = small_set(FreqTask::Separable, 2);
  const auto m = make_toy_model<double>(MixerKind::Plain, 2, 3, 0, 1);
  EXPECT_THROW(train(m, tr, te, {-1, 0.1, 4, 1}), ParamError);
  EXPECT_THROW(train(m, tr, te, {1, 0.1, 0, 1}), ParamError);
  EXPECT_THROW(train(m, tr, te, {1, std::nan(""), 4, 1}), ParamError);
  const auto big = generate_dataset<double>({FreqTask::Separable, 4, 32, 0.0, 1});
  EXPECT_THROW(train(m, tr, big, {1, 0.1, 4, 1}), ShapeError);
}

TEST(Train, LogCsv) {
  const std::vector<EpochStats> log{{0, 0.5, 0.25, 0.75}, {1, 0.125, 1.0, 0.5}};
  const std::string csv = training_log_csv(log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,loss,train_acc,test_acc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
