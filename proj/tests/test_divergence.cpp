#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "shiftdiv/divergence.hpp"
#include "shiftdiv/error.hpp"
#include "shiftdiv/simulate.hpp"

using namespace shiftdiv;

namespace {

Dataset two_points(std::size_t per_class) {
  Dataset d(1, 2, "points");
  for (std::size_t i = 0; i < per_class; ++i) {
    d.add(std::vector<double>{-1.0}, 0);
    d.add(std::vector<double>{1.0}, 1);
  }
  return d;
}

DistributionSpec unit_pair() {
  const double means[] = {-1.0, 1.0};
  const double sds[] = {1.0, 1.0};
  return gaussian_1d(means, sds, "real");
}

double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

}  // namespace

TEST(TrainClassifier, SymmetricPointMassesPutThresholdAtMidpoint) {
  const auto model = train_classifier(two_points(100), TrainConfig{});
  EXPECT_NEAR(model.threshold_1d(), 0.0, 0.05);
}

TEST(TrainClassifier, EqualVarianceGaussiansRecoverBayesBoundary) {
  const auto train = sample(unit_pair(), 10000, 7);
  const auto model = train_classifier(train, TrainConfig{});
  EXPECT_NEAR(model.threshold_1d(), 0.0, 0.1);
}

TEST(TrainClassifier, RejectsMixedDimensions) {
  std::vector<LabeledSample> samples{{{0.0, 1.0}, 0}, {{1.0, 2.0, 3.0}, 1}};
  EXPECT_THROW(
      {
        const auto d = Dataset::from_samples(samples, 2);
        train_classifier(d, TrainConfig{});
      },
      InputError);
}

TEST(TrainClassifier, RejectsNonFiniteFeatures) {
  auto d = two_points(3);
  d.add(std::vector<double>{std::numeric_limits<double>::quiet_NaN()}, 0);
  EXPECT_THROW(train_classifier(d, TrainConfig{}), InputError);
  auto e = two_points(3);
  e.add(std::vector<double>{std::numeric_limits<double>::infinity()}, 1);
  EXPECT_THROW(train_classifier(e, TrainConfig{}), InputError);
}

TEST(TrainClassifier, RejectsMissingClassAndBadConfig) {
  Dataset only_zero(1, 2);
  only_zero.add(std::vector<double>{0.5}, 0);
  EXPECT_THROW(train_classifier(only_zero, TrainConfig{}), InputError);

  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(train_classifier(two_points(2), bad), InputError);
  bad = TrainConfig{};
  bad.max_iterations = 0;
  EXPECT_THROW(train_classifier(two_points(2), bad), InputError);
  bad = TrainConfig{};
  bad.convergence_tolerance = -1.0;
  EXPECT_THROW(train_classifier(two_points(2), bad), InputError);
  bad = TrainConfig{};
  bad.l2_penalty = -0.1;
  EXPECT_THROW(train_classifier(two_points(2), bad), InputError);
}

TEST(TrainClassifier, LossHistoryNeverIncreases) {
  // A learning rate this large forces rejected steps on the first iterations.
  TrainConfig cfg;
  cfg.learning_rate = 50.0;
  cfg.max_iterations = 300;
  const auto model = train_classifier(sample(unit_pair(), 500, 3), cfg);
  const auto& h = model.meta.loss_history;
  ASSERT_GE(h.size(), 2u);
  EXPECT_GT(model.meta.rejected_steps, 0u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]) << "step " << i;
  EXPECT_DOUBLE_EQ(model.meta.final_loss, h.back());
}

TEST(TrainClassifier, StopsAtToleranceOrIterationCap) {
  TrainConfig loose;
  loose.convergence_tolerance = 1e-3;
  const auto converged = train_classifier(sample(unit_pair(), 1000, 5), loose);
  EXPECT_TRUE(converged.meta.converged);
  EXPECT_LT(converged.meta.final_gradient_norm, 1e-3);
  EXPECT_LT(converged.meta.iterations, loose.max_iterations);

  TrainConfig capped;
  capped.max_iterations = 3;
  const auto stopped = train_classifier(sample(unit_pair(), 1000, 5), capped);
  EXPECT_FALSE(stopped.meta.converged);
  EXPECT_EQ(stopped.meta.iterations, 3u);
}

TEST(TrainClassifier, DeterministicBitForBit) {
  const auto train = sample(unit_pair(), 2000, 9);
  TrainConfig cfg;
  cfg.rng_seed = 42;
  const auto a = train_classifier(train, cfg);
  const auto b = train_classifier(train, cfg);
  ASSERT_EQ(a.weights().size(), b.weights().size());
  for (std::size_t i = 0; i < a.weights().size(); ++i) EXPECT_EQ(a.weights()[i], b.weights()[i]);
}

TEST(SoftmaxObjective, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 0.1);
  constexpr std::size_t kClasses = 3, kDim = 4;
  for (int problem = 0; problem < 20; ++problem) {
    Dataset data(kDim, kClasses);
    for (std::size_t i = 0; i < 30; ++i) {
      std::vector<double> x(kDim);
      for (auto& v : x) v = normal(rng);
      data.add(x, i % kClasses);
    }
    std::vector<double> w(kClasses * (kDim + 1));
    for (auto& v : w) v = normal(rng);
    const double l2 = unit(rng);

    std::vector<double> grad(w.size());
    softmax_objective(w, kClasses, data, l2, grad);

    std::vector<double> fd(w.size());
    const double h = 1e-5;
    for (std::size_t k = 0; k < w.size(); ++k) {
      auto up = w, down = w;
      up[k] += h;
      down[k] -= h;
      fd[k] = (softmax_objective(up, kClasses, data, l2) -
               softmax_objective(down, kClasses, data, l2)) /
              (2 * h);
    }
    EXPECT_LT(relative_gap(grad, fd), 1e-5) << "problem " << problem;
  }
}

TEST(Accuracy, PerfectModelScoresOne) {
  Dataset d(1, 2);
  for (int i = 0; i < 25; ++i) {
    d.add(std::vector<double>{-2.0 - i}, 0);
    d.add(std::vector<double>{2.0 + i}, 1);
  }
  // Class 1 score 2x, class 0 score -2x.
  const Classifier model(2, 1, {-2.0, 0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(accuracy(model, d), 1.0);
}

TEST(Accuracy, ZeroWeightsTieToLowestClass) {
  const Classifier zero(2, 1);
  EXPECT_EQ(zero.predict(std::vector<double>{3.0}), 0u);
  EXPECT_DOUBLE_EQ(accuracy(zero, two_points(50)), 0.5);
}

TEST(Accuracy, BayesThresholdMatchesAnalyticAccuracy) {
  // Threshold 0: class 1 score x, class 0 score -x.
  const Classifier bayes(2, 1, {-1.0, 0.0, 1.0, 0.0});
  const auto data = sample(unit_pair(), 50000, 11);
  EXPECT_NEAR(accuracy(bayes, data), 1.0 - 0.5 * std::erfc(1.0 / std::sqrt(2.0)), 0.005);
}

TEST(Accuracy, CountsExactlyLikeBruteForce) {
  const auto data = sample(unit_pair(), 300, 13);
  const auto model = train_classifier(sample(unit_pair(), 300, 14), TrainConfig{});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> s(2);
    model.scores(data.features(i), s);
    const std::size_t pred = s[1] > s[0] ? 1 : 0;
    hits += pred == data.label(i);
  }
  EXPECT_DOUBLE_EQ(accuracy(model, data), static_cast<double>(hits) / data.size());
}

TEST(Accuracy, RejectsDimensionMismatchAndEmptyData) {
  const Classifier model(2, 2);
  EXPECT_THROW(accuracy(model, two_points(2)), InputError);
  EXPECT_THROW(accuracy(Classifier(2, 1), Dataset(1, 2)), InputError);
}

TEST(PseudoDivergence, IdenticalDistributionsGiveNearZero) {
  const auto spec = unit_pair();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = pseudo_divergence(sample(spec, 10000, 100 + seed), sample(spec, 10000, 200 + seed),
                                     sample(spec, 10000, 300 + seed), TrainConfig{});
    EXPECT_LT(r.divergence, 0.02);
    EXPECT_GE(r.divergence, 0.0);
  }
}

TEST(PseudoDivergence, TrainedOnSyntheticMatchesOracle) {
  const double sm[] = {-1.5, 0.5}, ss[] = {0.1, 0.1};
  const auto synth = gaussian_1d(sm, ss, "synthetic");
  const auto real = unit_pair();
  const auto r = pseudo_divergence(sample(synth, 10000, 21), sample(synth, 10000, 22),
                                   sample(real, 10000, 23), TrainConfig{},
                                   Direction::TrainedOnSecond);
  EXPECT_NEAR(r.acc_self, 1.0, 0.005);
  EXPECT_NEAR(r.acc_cross, 0.8123, 0.01);
  EXPECT_NEAR(r.divergence, 0.188, 0.015);
  EXPECT_EQ(r.direction, Direction::TrainedOnSecond);
}

TEST(PseudoDivergence, TrainedOnRealMatchesOracle) {
  const double sm[] = {-1.5, 0.5}, ss[] = {0.1, 0.1};
  const auto synth = gaussian_1d(sm, ss, "synthetic");
  const auto real = unit_pair();
  const auto r = pseudo_divergence(sample(real, 10000, 31), sample(real, 10000, 32),
                                   sample(synth, 10000, 33), TrainConfig{});
  EXPECT_NEAR(r.acc_self, 0.841, 0.01);
  EXPECT_NEAR(r.acc_cross, 1.0, 0.005);
  EXPECT_NEAR(r.divergence, 0.159, 0.015);
}

TEST(PseudoDivergence, ReportInvariantAndEmptyEvalRejected) {
  const auto spec = unit_pair();
  const auto train = sample(spec, 500, 1);
  const auto r = pseudo_divergence(train, sample(spec, 500, 2), sample(spec, 500, 3), TrainConfig{});
  EXPECT_DOUBLE_EQ(r.divergence, std::abs(r.acc_self - r.acc_cross));
  EXPECT_LE(r.divergence, 1.0);
  EXPECT_THROW(pseudo_divergence(train, Dataset(1, 2), sample(spec, 10, 3), TrainConfig{}),
               InputError);
  EXPECT_THROW(pseudo_divergence(train, sample(spec, 10, 3), Dataset(1, 2), TrainConfig{}),
               InputError);
}

TEST(PseudoDivergence, DeterministicReports) {
  const auto spec = unit_pair();
  auto run = [&] {
    return pseudo_divergence(sample(spec, 3000, 5), sample(spec, 3000, 6), sample(spec, 3000, 7),
                             TrainConfig{});
  };
  EXPECT_EQ(run(), run());
}

TEST(MakeDivergenceReport, NonNegativeForAnyOrdering) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const auto r = make_divergence_report(a, b, Direction::TrainedOnFirst);
    EXPECT_GE(r.divergence, 0.0);
    EXPECT_DOUBLE_EQ(r.divergence, make_divergence_report(b, a, Direction::TrainedOnFirst).divergence);
  }
}

TEST(Dataset, EnforcesLabelRangeAndCounts) {
  Dataset d(2, 3, "x");
  d.add(std::vector<double>{0.0, 0.0}, 2);
  EXPECT_THROW(d.add(std::vector<double>{0.0, 0.0}, 3), InputError);
  EXPECT_THROW(d.add(std::vector<double>{0.0}, 0), InputError);
  EXPECT_EQ(d.class_counts(), (std::vector<std::size_t>{0, 0, 1}));
  EXPECT_THROW(Dataset(0, 2), InputError);
  EXPECT_THROW(Dataset(1, 1), InputError);
}
