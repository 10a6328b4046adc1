#include "shiftdiv/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shiftdiv/error.hpp"
#include "shiftdiv/rng.hpp"

namespace shiftdiv {

Dataset::Dataset(std::size_t dim, std::size_t n_classes, std::string source_tag)
    : dim_(dim), n_classes_(n_classes), source_tag_(std::move(source_tag)) {
  if (dim_ == 0) throw InputError("dataset dimension must be positive");
  if (n_classes_ < 2) throw InputError("dataset needs at least 2 classes");
}

Dataset Dataset::from_samples(const std::vector<LabeledSample>& samples, std::size_t n_classes,
                              std::string source_tag) {
  if (samples.empty()) throw InputError("dataset must not be empty");
  Dataset out(samples.front().features.size(), n_classes, std::move(source_tag));
  out.reserve(samples.size());
  for (const auto& s : samples) out.add(s);
  return out;
}

void Dataset::add(std::span<const double> features, std::size_t label) {
  if (features.size() != dim_) {
    throw InputError("sample " + std::to_string(size()) + " has dimension " +
                     std::to_string(features.size()) + ", expected " + std::to_string(dim_));
  }
  if (label >= n_classes_) {
    throw InputError("sample " + std::to_string(size()) + " has label " + std::to_string(label) +
                     " but the dataset declares " + std::to_string(n_classes_) + " classes");
  }
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
}

void Dataset::reserve(std::size_t n) {
  features_.reserve(n * dim_);
  labels_.reserve(n);
}

LabeledSample Dataset::sample(std::size_t i) const {
  auto f = features(i);
  return {std::vector<double>(f.begin(), f.end()), labels_[i]};
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(n_classes_, 0);
  for (auto label : labels_) ++counts[label];
  return counts;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw InputError("learning_rate must be positive and finite");
  if (max_iterations == 0) throw InputError("max_iterations must be positive");
  if (!(convergence_tolerance > 0.0))
    throw InputError("convergence_tolerance must be positive");
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty))
    throw InputError("l2_penalty must be non-negative and finite");
}

Classifier::Classifier(std::size_t n_classes, std::size_t dim)
    : n_classes_(n_classes), dim_(dim), weights_(n_classes * (dim + 1), 0.0) {}

Classifier::Classifier(std::size_t n_classes, std::size_t dim, std::vector<double> weights)
    : n_classes_(n_classes), dim_(dim), weights_(std::move(weights)) {
  if (weights_.size() != n_classes_ * (dim_ + 1)) {
    throw InputError("weight vector has " + std::to_string(weights_.size()) +
                     " entries, expected " + std::to_string(n_classes_ * (dim_ + 1)));
  }
}

void Classifier::scores(std::span<const double> x, std::span<double> out) const {
  const std::size_t s = stride();
  for (std::size_t k = 0; k < n_classes_; ++k) {
    const double* w = weights_.data() + k * s;
    double z = w[dim_];
    for (std::size_t j = 0; j < dim_; ++j) z += w[j] * x[j];
    out[k] = z;
  }
}

std::size_t Classifier::predict(std::span<const double> x) const {
  const std::size_t s = stride();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_classes_; ++k) {
    const double* w = weights_.data() + k * s;
    double z = w[dim_];
    for (std::size_t j = 0; j < dim_; ++j) z += w[j] * x[j];
    // Strict comparison keeps the lowest index on ties.
    if (z > best_score) {
      best_score = z;
      best = k;
    }
  }
  return best;
}

double Classifier::threshold_1d() const {
  if (n_classes_ != 2 || dim_ != 1) {
    throw UnsupportedSpecError("threshold_1d needs a two-class one-feature model");
  }
  const double slope = weight(1, 0) - weight(0, 0);
  const double offset = weight(1, 1) - weight(0, 1);
  if (slope == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -offset / slope;
}

namespace {

void check_compatible(const Classifier& model, const Dataset& data) {
  if (data.dim() != model.dim()) {
    throw InputError("dataset '" + data.source_tag() + "' has dimension " +
                     std::to_string(data.dim()) + ", model expects " +
                     std::to_string(model.dim()));
  }
  if (data.n_classes() > model.n_classes()) {
    throw InputError("dataset '" + data.source_tag() + "' declares " +
                     std::to_string(data.n_classes()) + " classes, model has " +
                     std::to_string(model.n_classes()));
  }
}

void check_trainable(const Dataset& train) {
  if (train.empty()) throw InputError("training set is empty");
  const auto counts = train.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) {
      throw InputError("class " + std::to_string(k) + " is absent from training set '" +
                       train.source_tag() + "'");
    }
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (double v : train.features(i)) {
      if (!std::isfinite(v)) {
        throw InputError("training sample " + std::to_string(i) + " has a non-finite feature");
      }
    }
  }
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double softmax_objective(std::span<const double> weights, std::size_t n_classes,
                         const Dataset& data, double l2_penalty, std::span<double> gradient) {
  const std::size_t dim = data.dim();
  const std::size_t stride = dim + 1;
  if (weights.size() != n_classes * stride) {
    throw InputError("weight vector does not match dataset dimension");
  }
  if (data.empty()) throw InputError("objective over an empty dataset");
  if (data.n_classes() > n_classes) throw InputError("dataset has more classes than the model");
  const bool want_grad = !gradient.empty();
  if (want_grad) {
    if (gradient.size() != weights.size()) throw InputError("gradient buffer has wrong size");
    std::fill(gradient.begin(), gradient.end(), 0.0);
  }

  std::vector<double> z(n_classes);
  std::vector<double> e(n_classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.features(i);
    const std::size_t y = data.label(i);
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_classes; ++k) {
      const double* w = weights.data() + k * stride;
      double s = w[dim];
      for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[j];
      z[k] = s;
      zmax = std::max(zmax, s);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      e[k] = std::exp(z[k] - zmax);
      denom += e[k];
    }
    // -log p_y = log(sum exp) - z_y, both relative to zmax.
    loss += std::log(denom) - (z[y] - zmax);
    if (want_grad) {
      for (std::size_t k = 0; k < n_classes; ++k) {
        const double residual = e[k] / denom - (k == y ? 1.0 : 0.0);
        double* g = gradient.data() + k * stride;
        for (std::size_t j = 0; j < dim; ++j) g[j] += residual * x[j];
        g[dim] += residual;
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(data.size());
  loss *= inv_n;
  double penalty = 0.0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double w = weights[k * stride + j];
      penalty += w * w;
    }
  }
  loss += 0.5 * l2_penalty * penalty;

  if (want_grad) {
    for (auto& g : gradient) g *= inv_n;
    for (std::size_t k = 0; k < n_classes; ++k) {
      for (std::size_t j = 0; j < dim; ++j) {
        gradient[k * stride + j] += l2_penalty * weights[k * stride + j];
      }
    }
  }
  return loss;
}

Classifier train_classifier(const Dataset& train, const TrainConfig& cfg) {
  cfg.validate();
  check_trainable(train);

  const std::size_t n_classes = train.n_classes();
  const std::size_t dim = train.dim();

  // Descent runs on mean-centered features. The bias absorbs the shift and
  // the penalty skips the bias, so the objective is unchanged; only the
  // descent path becomes translation-equivariant.
  std::vector<double> center(dim, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto x = train.features(i);
    for (std::size_t j = 0; j < dim; ++j) center[j] += x[j];
  }
  for (auto& c : center) c /= static_cast<double>(train.size());
  Dataset centered(dim, n_classes, train.source_tag());
  centered.reserve(train.size());
  std::vector<double> shifted(dim);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto x = train.features(i);
    for (std::size_t j = 0; j < dim; ++j) shifted[j] = x[j] - center[j];
    centered.add(shifted, train.label(i));
  }

  Classifier model(n_classes, dim);
  auto w = model.mutable_weights();
  if (cfg.rng_seed != 0) {
    NormalStream jitter(cfg.rng_seed);
    for (auto& v : w) v = 1e-3 * jitter.standard_normal();
  }

  std::vector<double> grad(w.size());
  std::vector<double> trial(w.size());
  std::vector<double> trial_grad(w.size());

  TrainingMeta& meta = model.meta;
  double loss = softmax_objective(w, n_classes, centered, cfg.l2_penalty, grad);
  double grad_norm = l2_norm(grad);
  meta.loss_history.push_back(loss);

  double step = cfg.learning_rate;
  // Halving below this cannot move any weight representable near 1.
  constexpr double kMinStep = 1e-12;

  while (meta.iterations < cfg.max_iterations) {
    if (grad_norm < cfg.convergence_tolerance) {
      meta.converged = true;
      break;
    }
    ++meta.iterations;
    for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] - step * grad[i];
    const double trial_loss =
        softmax_objective(trial, n_classes, centered, cfg.l2_penalty, trial_grad);
    if (!(trial_loss <= loss)) {
      ++meta.rejected_steps;
      step *= 0.5;
      if (step < kMinStep) break;
      continue;
    }
    std::copy(trial.begin(), trial.end(), w.begin());
    grad.swap(trial_grad);
    loss = trial_loss;
    grad_norm = l2_norm(grad);
    meta.loss_history.push_back(loss);
  }
  if (!meta.converged && grad_norm < cfg.convergence_tolerance) meta.converged = true;

  // Back to raw coordinates: b_k -= w_k . center.
  const std::size_t stride = dim + 1;
  for (std::size_t k = 0; k < n_classes; ++k) {
    double shift = 0.0;
    for (std::size_t j = 0; j < dim; ++j) shift += w[k * stride + j] * center[j];
    w[k * stride + dim] -= shift;
  }

  meta.final_loss = loss;
  meta.final_gradient_norm = grad_norm;
  return model;
}

double accuracy(const Classifier& model, const Dataset& data) {
  check_compatible(model, data);
  if (data.empty()) throw InputError("accuracy over an empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.predict(data.features(i)) == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

DivergenceReport make_divergence_report(double acc_self, double acc_cross, Direction direction,
                                        bool clamped) {
  DivergenceReport r;
  r.acc_self = acc_self;
  r.acc_cross = acc_cross;
  r.divergence = std::abs(acc_self - acc_cross);
  r.direction = direction;
  r.clamped = clamped;
  return r;
}

DivergenceRun pseudo_divergence_with_model(const Dataset& train, const Dataset& eval_self,
                                           const Dataset& eval_cross, const TrainConfig& cfg,
                                           Direction direction) {
  if (eval_self.empty()) throw InputError("self-evaluation set is empty");
  if (eval_cross.empty()) throw InputError("cross-evaluation set is empty");
  if (eval_self.dim() != train.dim() || eval_cross.dim() != train.dim()) {
    throw InputError("training and evaluation sets differ in dimension");
  }
  Classifier model = train_classifier(train, cfg);
  const double acc_self = accuracy(model, eval_self);
  const double acc_cross = accuracy(model, eval_cross);
  return {std::move(model), make_divergence_report(acc_self, acc_cross, direction)};
}

DivergenceReport pseudo_divergence(const Dataset& train, const Dataset& eval_self,
                                   const Dataset& eval_cross, const TrainConfig& cfg,
                                   Direction direction) {
  return pseudo_divergence_with_model(train, eval_self, eval_cross, cfg, direction).report;
}

const char* to_string(Direction direction) noexcept {
  switch (direction) {
    case Direction::TrainedOnFirst:
      return "trained_on_first";
    case Direction::TrainedOnSecond:
      return "trained_on_second";
  }
  return "unknown";
}

}  // namespace shiftdiv
