#pragma once

// Labeled Gaussian mixtures, their exact 1-D accuracy oracles, and the
// train-on-real versus train-on-synthetic experiment.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shiftdiv/divergence.hpp"

namespace shiftdiv {

// One diagonal-covariance Gaussian belonging to class `label`. A class may
// own several components; their weights must sum to 1.
struct ClassComponent {
  std::size_t label = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
  double weight = 1.0;
};

struct DistributionSpec {
  std::size_t dim = 1;
  std::string tag;
  std::vector<ClassComponent> classes;

  // Throws InputError. Labels must form 0..K-1 with K >= 2.
  void validate() const;
  std::size_t n_classes() const;
  std::vector<const ClassComponent*> components_of(std::size_t label) const;
};

// Convenience constructor for 1-D specs with one component per class; class
// k gets N(means[k], stddevs[k]^2).
DistributionSpec gaussian_1d(std::span<const double> means, std::span<const double> stddevs,
                             std::string tag = {});

// Draws exactly n_per_class samples for each label, ordered by label. Each
// class has its own stream seeded from (seed, label), so the same seed on
// two specs yields the same underlying standard normals.
Dataset sample(const DistributionSpec& spec, std::size_t n_per_class, std::uint64_t seed);

// Standard normal CDF.
double normal_cdf(double z);

// Exact accuracy of "predict class 0 below `threshold`, class 1 otherwise"
// under equal class priors. Requires a 1-D spec with two single-component
// classes; throws UnsupportedSpecError otherwise.
double analytic_accuracy_1d(double threshold, const DistributionSpec& spec);

// Exact Bayes error for the same family, allowing unequal variances (the
// optimal rule then has up to two cut points).
double bayes_error_1d(const DistributionSpec& spec);

struct AsymmetryResult {
  // forward: trained on real_spec. backward: trained on synth_spec.
  DivergenceReport forward;
  DivergenceReport backward;
  // Oracle divergences for a classifier sitting at the training spec's
  // midpoint threshold; empty when the specs are outside the 1-D
  // equal-variance two-class family.
  std::optional<double> analytic_forward;
  std::optional<double> analytic_backward;
  // Learned decision thresholds for 1-D two-class specs.
  std::optional<double> forward_threshold;
  std::optional<double> backward_threshold;

  // True when both analytic values exist and each empirical divergence lies
  // within `tolerance` of its oracle.
  bool validated(double tolerance) const;
};

struct ExperimentData {
  Dataset real_train;
  Dataset real_eval;
  Dataset synth_train;
  Dataset synth_eval;
};

// The four disjoint samples asymmetry_experiment uses for a given seed.
ExperimentData experiment_data(const DistributionSpec& real_spec,
                               const DistributionSpec& synth_spec, std::size_t n_per_class,
                               std::uint64_t seed);

// Samples four disjoint datasets (train and held-out evaluation per spec)
// from seeds derived from `seed`, then runs the pseudo-divergence in both
// directions.
AsymmetryResult asymmetry_experiment(const DistributionSpec& real_spec,
                                     const DistributionSpec& synth_spec, std::size_t n_per_class,
                                     const TrainConfig& cfg, std::uint64_t seed);

// Independent experiment runs, one per seed, spread over `jobs` threads.
std::map<std::uint64_t, AsymmetryResult> asymmetry_sweep(const DistributionSpec& real_spec,
                                                         const DistributionSpec& synth_spec,
                                                         std::size_t n_per_class,
                                                         const TrainConfig& cfg,
                                                         std::span<const std::uint64_t> seeds,
                                                         std::size_t jobs = 1);

// JSON document {"dim", "tag", "classes": [{"label", "mean", "stddev",
// "weight"}]}. Errors name the source and the offending field.
DistributionSpec parse_spec_json(const std::string& text, const std::string& source);
DistributionSpec read_spec_json(const std::filesystem::path& path);
std::string spec_to_json(const DistributionSpec& spec);

std::string asymmetry_result_json(const AsymmetryResult& result);

}  // namespace shiftdiv
