#pragma once

// Classification-based pseudo-divergence between two labeled distributions.
//
// A classifier is fit on samples of one distribution and its accuracy is
// measured on held-out samples of that same distribution (the "self"
// accuracy) and on samples of the other distribution (the "cross"
// accuracy). The divergence is the absolute gap between the two. It is
// non-negative, vanishes when both distributions coincide, and is not
// symmetric in its arguments.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shiftdiv {

struct LabeledSample {
  std::vector<double> features;
  std::size_t label = 0;
};

// Row-major feature storage. All samples share one dimension and every label
// is below n_classes(); add() enforces both.
class Dataset {
 public:
  Dataset(std::size_t dim, std::size_t n_classes, std::string source_tag = {});

  // Builds a dataset from loose samples, rejecting mixed dimensions.
  static Dataset from_samples(const std::vector<LabeledSample>& samples,
                              std::size_t n_classes, std::string source_tag = {});

  void add(std::span<const double> features, std::size_t label);
  void add(const LabeledSample& sample) { add(sample.features, sample.label); }
  void reserve(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  const std::string& source_tag() const noexcept { return source_tag_; }

  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  LabeledSample sample(std::size_t i) const;

  std::vector<std::size_t> class_counts() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t dim_;
  std::size_t n_classes_;
  std::string source_tag_;
  std::vector<double> features_;
  std::vector<std::size_t> labels_;
};

struct TrainConfig {
  double learning_rate = 1.0;
  std::size_t max_iterations = 1000;
  // Training stops once the gradient's Euclidean norm falls below this.
  double convergence_tolerance = 1e-6;
  // Weight on 0.5 * ||W||^2, bias column excluded.
  double l2_penalty = 0.0;
  // 0 starts from all-zero weights; any other value adds a small
  // deterministic jitter to the initial weights.
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct TrainingMeta {
  std::size_t iterations = 0;
  std::size_t rejected_steps = 0;
  double final_loss = 0.0;
  double final_gradient_norm = 0.0;
  bool converged = false;
  // Objective value after each accepted step, starting with the initial one.
  std::vector<double> loss_history;
};

// Multinomial logistic regression with the bias folded in as the last column
// of an n_classes x (dim + 1) weight matrix.
class Classifier {
 public:
  Classifier(std::size_t n_classes, std::size_t dim);
  Classifier(std::size_t n_classes, std::size_t dim, std::vector<double> weights);

  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t stride() const noexcept { return dim_ + 1; }

  // Column `dim()` holds the bias.
  double weight(std::size_t cls, std::size_t column) const {
    return weights_[cls * stride() + column];
  }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> mutable_weights() noexcept { return weights_; }

  void scores(std::span<const double> x, std::span<double> out) const;

  // argmax of the class scores; ties go to the lowest class index.
  std::size_t predict(std::span<const double> x) const;

  // Decision threshold of a two-class, one-feature model: the x at which
  // both class scores are equal. NaN when the slopes coincide.
  double threshold_1d() const;

  TrainingMeta meta;

 private:
  std::size_t n_classes_;
  std::size_t dim_;
  std::vector<double> weights_;
};

// Mean softmax cross-entropy of `weights` (laid out as in Classifier) on
// `data`, plus the L2 term. When `gradient` is non-empty it receives the
// gradient with respect to every weight and must match weights.size().
double softmax_objective(std::span<const double> weights, std::size_t n_classes,
                         const Dataset& data, double l2_penalty,
                         std::span<double> gradient = {});

// Full-batch gradient descent with step halving: a step that would raise the
// objective is rejected and retried with half the learning rate, so the
// recorded loss history never increases.
Classifier train_classifier(const Dataset& train, const TrainConfig& cfg);

// Fraction of samples whose argmax prediction equals the label.
double accuracy(const Classifier& model, const Dataset& data);

enum class Direction { TrainedOnFirst, TrainedOnSecond };

struct DivergenceReport {
  double acc_self = 0.0;
  double acc_cross = 0.0;
  double divergence = 0.0;
  Direction direction = Direction::TrainedOnFirst;
  // Set when an accuracy was derived from an error rate outside [0, 1] and
  // had to be clamped.
  bool clamped = false;

  bool operator==(const DivergenceReport&) const = default;
};

DivergenceReport make_divergence_report(double acc_self, double acc_cross,
                                        Direction direction, bool clamped = false);

struct DivergenceRun {
  Classifier model;
  DivergenceReport report;
};

DivergenceRun pseudo_divergence_with_model(const Dataset& train, const Dataset& eval_self,
                                           const Dataset& eval_cross, const TrainConfig& cfg,
                                           Direction direction = Direction::TrainedOnFirst);

// Trains on `train`, scores held-out `eval_self` and `eval_cross`, and
// reports |acc_self - acc_cross|.
DivergenceReport pseudo_divergence(const Dataset& train, const Dataset& eval_self,
                                   const Dataset& eval_cross, const TrainConfig& cfg,
                                   Direction direction = Direction::TrainedOnFirst);

const char* to_string(Direction direction) noexcept;

}  // namespace shiftdiv
