#include "shiftdiv/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "shiftdiv/error.hpp"
#include "shiftdiv/parallel.hpp"
#include "shiftdiv/rng.hpp"
#include "text_util.hpp"

namespace shiftdiv {

namespace {

std::string field_name(std::size_t index, const char* member) {
  return "classes[" + std::to_string(index) + "]." + member;
}

}  // namespace

void DistributionSpec::validate() const {
  if (dim == 0) throw InputError("field 'dim': must be a positive integer");
  if (classes.empty()) throw InputError("field 'classes': must list at least one component");

  std::map<std::size_t, double> weight_sums;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    if (c.mean.size() != dim) {
      throw InputError("field '" + field_name(i, "mean") + "': has " +
                       std::to_string(c.mean.size()) + " entries, expected dim=" +
                       std::to_string(dim));
    }
    if (c.stddev.size() != dim) {
      throw InputError("field '" + field_name(i, "stddev") + "': has " +
                       std::to_string(c.stddev.size()) + " entries, expected dim=" +
                       std::to_string(dim));
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) throw InputError("field '" + field_name(i, "mean") + "': not finite");
    }
    for (double s : c.stddev) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw InputError("field '" + field_name(i, "stddev") + "': must be positive and finite");
      }
    }
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw InputError("field '" + field_name(i, "weight") + "': must lie in (0, 1]");
    }
    weight_sums[c.label] += c.weight;
  }

  std::size_t expected = 0;
  for (const auto& [label, sum] : weight_sums) {
    if (label != expected) {
      throw InputError("field 'classes': labels must be 0.." +
                       std::to_string(weight_sums.size() - 1) + ", label " +
                       std::to_string(expected) + " is missing");
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InputError("field 'classes': component weights of label " + std::to_string(label) +
                       " sum to " + detail::format_double(sum) + ", expected 1");
    }
    ++expected;
  }
  if (weight_sums.size() < 2) throw InputError("field 'classes': needs at least 2 class labels");
}

std::size_t DistributionSpec::n_classes() const {
  std::size_t k = 0;
  for (const auto& c : classes) k = std::max(k, c.label + 1);
  return k;
}

std::vector<const ClassComponent*> DistributionSpec::components_of(std::size_t label) const {
  std::vector<const ClassComponent*> out;
  for (const auto& c : classes) {
    if (c.label == label) out.push_back(&c);
  }
  return out;
}

DistributionSpec gaussian_1d(std::span<const double> means, std::span<const double> stddevs,
                             std::string tag) {
  if (means.size() != stddevs.size()) throw InputError("means and stddevs differ in length");
  DistributionSpec spec;
  spec.dim = 1;
  spec.tag = std::move(tag);
  for (std::size_t k = 0; k < means.size(); ++k) {
    spec.classes.push_back({k, {means[k]}, {stddevs[k]}, 1.0});
  }
  spec.validate();
  return spec;
}

Dataset sample(const DistributionSpec& spec, std::size_t n_per_class, std::uint64_t seed) {
  spec.validate();
  if (n_per_class == 0) throw InputError("n_per_class must be positive");

  const std::size_t n_classes = spec.n_classes();
  Dataset out(spec.dim, n_classes, spec.tag);
  out.reserve(n_per_class * n_classes);
  std::vector<double> x(spec.dim);
  for (std::size_t label = 0; label < n_classes; ++label) {
    const auto components = spec.components_of(label);
    NormalStream stream(derive_seed(seed, label));
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const ClassComponent* c = components.front();
      if (components.size() > 1) {
        const double u = stream.uniform();
        double cumulative = 0.0;
        for (const auto* candidate : components) {
          c = candidate;
          cumulative += candidate->weight;
          if (u < cumulative) break;
        }
      }
      for (std::size_t j = 0; j < spec.dim; ++j) x[j] = stream.normal(c->mean[j], c->stddev[j]);
      out.add(x, label);
    }
  }
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

struct Gaussian1d {
  double mean;
  double stddev;
};

std::array<Gaussian1d, 2> two_class_1d(const DistributionSpec& spec) {
  spec.validate();
  if (spec.dim != 1) throw UnsupportedSpecError("1-D oracle needs dim == 1");
  if (spec.n_classes() != 2 || spec.classes.size() != 2) {
    throw UnsupportedSpecError("1-D oracle needs two classes with one component each");
  }
  std::array<Gaussian1d, 2> out{};
  for (const auto& c : spec.classes) out[c.label] = {c.mean[0], c.stddev[0]};
  return out;
}

// P(lo < X < hi) for X ~ N(g.mean, g.stddev^2), evaluated on whichever tail
// keeps the subtraction well conditioned.
double interval_mass(const Gaussian1d& g, double lo, double hi) {
  const double a = (lo - g.mean) / g.stddev;
  const double b = (hi - g.mean) / g.stddev;
  if (a >= 0.0) return normal_cdf(-a) - normal_cdf(-b);
  return normal_cdf(b) - normal_cdf(a);
}

}  // namespace

double analytic_accuracy_1d(double threshold, const DistributionSpec& spec) {
  const auto g = two_class_1d(spec);
  const double inf = std::numeric_limits<double>::infinity();
  return 0.5 * (interval_mass(g[0], -inf, threshold) + interval_mass(g[1], threshold, inf));
}

double bayes_error_1d(const DistributionSpec& spec) {
  const auto g = two_class_1d(spec);
  const double inf = std::numeric_limits<double>::infinity();

  // log p0(x) - log p1(x) = a x^2 + b x + c
  const double v0 = g[0].stddev * g[0].stddev;
  const double v1 = g[1].stddev * g[1].stddev;
  const double a = 0.5 / v1 - 0.5 / v0;
  const double b = g[0].mean / v0 - g[1].mean / v1;
  const double c = 0.5 * g[1].mean * g[1].mean / v1 - 0.5 * g[0].mean * g[0].mean / v0 +
                   std::log(g[1].stddev / g[0].stddev);
  auto log_ratio = [&](double x) { return (a * x + b) * x + c; };

  std::vector<double> cuts;
  if (a == 0.0) {
    if (b == 0.0) return 0.5;
    cuts.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc > 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      cuts.push_back(q / a);
      if (q != 0.0) cuts.push_back(c / q);
      std::sort(cuts.begin(), cuts.end());
    }
  }

  std::vector<double> edges{-inf};
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(inf);

  double error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi = edges[i + 1];
    double probe;
    if (std::isinf(lo) && std::isinf(hi)) {
      probe = 0.0;
    } else if (std::isinf(lo)) {
      probe = hi - 1.0;
    } else if (std::isinf(hi)) {
      probe = lo + 1.0;
    } else {
      probe = 0.5 * (lo + hi);
    }
    // Where class 0 is more likely the rule predicts 0 and errs on class 1.
    error += log_ratio(probe) > 0.0 ? interval_mass(g[1], lo, hi) : interval_mass(g[0], lo, hi);
  }
  return 0.5 * error;
}

bool AsymmetryResult::validated(double tolerance) const {
  return analytic_forward && analytic_backward &&
         std::abs(forward.divergence - *analytic_forward) <= tolerance &&
         std::abs(backward.divergence - *analytic_backward) <= tolerance;
}

namespace {

bool in_oracle_family(const DistributionSpec& spec) {
  return spec.dim == 1 && spec.classes.size() == 2 && spec.n_classes() == 2;
}

// Midpoint-threshold oracle; only meaningful when the training spec has
// equal class variances, where the midpoint is the Bayes boundary.
std::optional<double> analytic_divergence(const DistributionSpec& train_spec,
                                          const DistributionSpec& other_spec) {
  if (!in_oracle_family(train_spec) || !in_oracle_family(other_spec)) return std::nullopt;
  const auto g = two_class_1d(train_spec);
  if (g[0].stddev != g[1].stddev) return std::nullopt;
  const double midpoint = 0.5 * (g[0].mean + g[1].mean);
  return std::abs(analytic_accuracy_1d(midpoint, train_spec) -
                  analytic_accuracy_1d(midpoint, other_spec));
}

enum Stream : std::uint64_t { kRealTrain = 0, kRealEval = 1, kSynthTrain = 2, kSynthEval = 3 };

}  // namespace

ExperimentData experiment_data(const DistributionSpec& real_spec,
                               const DistributionSpec& synth_spec, std::size_t n_per_class,
                               std::uint64_t seed) {
  real_spec.validate();
  synth_spec.validate();
  if (real_spec.dim != synth_spec.dim) {
    throw InputError("real and synthetic specs differ in dimension");
  }
  if (real_spec.n_classes() != synth_spec.n_classes()) {
    throw InputError("real and synthetic specs declare different class labels");
  }

  return {sample(real_spec, n_per_class, derive_seed(seed, kRealTrain)),
          sample(real_spec, n_per_class, derive_seed(seed, kRealEval)),
          sample(synth_spec, n_per_class, derive_seed(seed, kSynthTrain)),
          sample(synth_spec, n_per_class, derive_seed(seed, kSynthEval))};
}

AsymmetryResult asymmetry_experiment(const DistributionSpec& real_spec,
                                     const DistributionSpec& synth_spec, std::size_t n_per_class,
                                     const TrainConfig& cfg, std::uint64_t seed) {
  const auto [real_train, real_eval, synth_train, synth_eval] =
      experiment_data(real_spec, synth_spec, n_per_class, seed);

  auto forward =
      pseudo_divergence_with_model(real_train, real_eval, synth_eval, cfg, Direction::TrainedOnFirst);
  auto backward = pseudo_divergence_with_model(synth_train, synth_eval, real_eval, cfg,
                                               Direction::TrainedOnSecond);

  AsymmetryResult result;
  result.forward = forward.report;
  result.backward = backward.report;
  result.analytic_forward = analytic_divergence(real_spec, synth_spec);
  result.analytic_backward = analytic_divergence(synth_spec, real_spec);
  if (real_spec.dim == 1 && real_spec.n_classes() == 2) {
    result.forward_threshold = forward.model.threshold_1d();
    result.backward_threshold = backward.model.threshold_1d();
  }
  return result;
}

std::map<std::uint64_t, AsymmetryResult> asymmetry_sweep(const DistributionSpec& real_spec,
                                                         const DistributionSpec& synth_spec,
                                                         std::size_t n_per_class,
                                                         const TrainConfig& cfg,
                                                         std::span<const std::uint64_t> seeds,
                                                         std::size_t jobs) {
  std::vector<AsymmetryResult> slots(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    slots[i] = asymmetry_experiment(real_spec, synth_spec, n_per_class, cfg, seeds[i]);
  });
  std::map<std::uint64_t, AsymmetryResult> out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out.emplace(seeds[i], std::move(slots[i]));
  return out;
}

namespace {

using detail::json;

std::vector<double> read_vector(const json& node, const std::string& field) {
  if (!node.is_array()) throw InputError("field '" + field + "': expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : node) {
    if (!v.is_number()) throw InputError("field '" + field + "': expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

DistributionSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("document must be a JSON object");
  DistributionSpec spec;

  if (!doc.contains("dim")) throw InputError("field 'dim': missing");
  if (!doc["dim"].is_number_integer() || doc["dim"].get<long long>() <= 0) {
    throw InputError("field 'dim': must be a positive integer");
  }
  spec.dim = doc["dim"].get<std::size_t>();

  if (doc.contains("tag")) {
    if (!doc["tag"].is_string()) throw InputError("field 'tag': must be a string");
    spec.tag = doc["tag"].get<std::string>();
  }

  if (!doc.contains("classes")) throw InputError("field 'classes': missing");
  if (!doc["classes"].is_array()) throw InputError("field 'classes': must be an array");
  const auto& classes = doc["classes"];
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& node = classes[i];
    if (!node.is_object()) throw InputError("field 'classes[" + std::to_string(i) + "]': must be an object");
    ClassComponent c;
    if (!node.contains("label")) throw InputError("field '" + field_name(i, "label") + "': missing");
    if (!node["label"].is_number_integer() || node["label"].get<long long>() < 0) {
      throw InputError("field '" + field_name(i, "label") + "': must be a non-negative integer");
    }
    c.label = node["label"].get<std::size_t>();
    for (const char* member : {"mean", "stddev"}) {
      if (!node.contains(member)) throw InputError("field '" + field_name(i, member) + "': missing");
    }
    c.mean = read_vector(node["mean"], field_name(i, "mean"));
    c.stddev = read_vector(node["stddev"], field_name(i, "stddev"));
    if (node.contains("weight")) {
      if (!node["weight"].is_number()) {
        throw InputError("field '" + field_name(i, "weight") + "': must be a number");
      }
      c.weight = node["weight"].get<double>();
    }
    spec.classes.push_back(std::move(c));
  }
  spec.validate();
  return spec;
}

}  // namespace

DistributionSpec parse_spec_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    return spec_from_json(doc);
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
}

DistributionSpec read_spec_json(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_json(buf.str(), path.string());
}

std::string spec_to_json(const DistributionSpec& spec) {
  json classes = json::array();
  for (const auto& c : spec.classes) {
    classes.push_back(
        {{"label", c.label}, {"mean", c.mean}, {"stddev", c.stddev}, {"weight", c.weight}});
  }
  json doc{{"dim", spec.dim}, {"tag", spec.tag}, {"classes", std::move(classes)}};
  return doc.dump(2) + "\n";
}

std::string asymmetry_result_json(const AsymmetryResult& result) {
  auto optional_number = [](const std::optional<double>& v) {
    return v ? detail::number_or_null(*v) : json(nullptr);
  };
  json doc{
      {"forward", detail::to_json(result.forward)},
      {"backward", detail::to_json(result.backward)},
      {"analytic_forward", optional_number(result.analytic_forward)},
      {"analytic_backward", optional_number(result.analytic_backward)},
      {"forward_threshold", optional_number(result.forward_threshold)},
      {"backward_threshold", optional_number(result.backward_threshold)},
      {"backward_exceeds_forward", result.backward.divergence > result.forward.divergence},
  };
  return doc.dump(2) + "\n";
}

}  // namespace shiftdiv
