#pragma once

// Evaluation protocol for TTS systems: score transcript manifests per
// (system, train/test direction), turn WERs into the pseudo-divergence, rank
// systems under each metric, and measure rank agreement with reference
// metrics such as MOS.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shiftdiv/divergence.hpp"
#include "shiftdiv/rank_stats.hpp"
#include "shiftdiv/wer.hpp"

namespace shiftdiv {

enum class DataDomain { Real, Synthetic };

const char* to_string(DataDomain domain) noexcept;

// Where the ASR model behind a manifest was trained and what it transcribed.
struct SystemRun {
  std::string system;
  DataDomain train_on = DataDomain::Synthetic;
  DataDomain test_on = DataDomain::Real;
  std::filesystem::path manifest_path;

  std::string label() const;
};

// Pooled corpus WER of the run's manifest. Parse failures surface as
// ParseError naming the manifest and line; a missing manifest raises
// InputMissingError.
double evaluate_system(const SystemRun& run, const NormalizationPolicy& policy = {},
                       std::size_t jobs = 1);

// Pure arithmetic core of wer_divergence: accuracy proxy clamp(1 - WER, 0, 1)
// on both sides; `clamped` records whether either side was clipped.
DivergenceReport wer_divergence_from_scores(double self_wer, double cross_wer,
                                            Direction direction);

// self_run must test on its own training domain; cross_run must share
// train_on and test on the other domain. Models trained on real data map to
// Direction::TrainedOnFirst, synthetic-trained models to TrainedOnSecond.
DivergenceReport wer_divergence(const SystemRun& self_run, const SystemRun& cross_run,
                                const NormalizationPolicy& policy = {}, std::size_t jobs = 1);

enum class MetricDirection { HigherBetter, LowerBetter };

class ScoreTable {
 public:
  // Throws InputError if the metric already has a different direction or
  // the (metric, system) cell is already set.
  void add(const std::string& metric, MetricDirection direction, const std::string& system,
           double score);

  bool has_metric(const std::string& metric) const { return rows_.contains(metric); }
  MetricDirection direction(const std::string& metric) const;
  double score(const std::string& metric, const std::string& system) const;
  const std::map<std::string, double>& row(const std::string& metric) const;

  std::vector<std::string> metrics() const;
  // Every system named anywhere in the table, in first-seen order.
  const std::vector<std::string>& systems() const noexcept { return system_order_; }
  // Metrics in first-seen order, which file loaders preserve.
  const std::vector<std::string>& metric_order() const noexcept { return metric_order_; }

 private:
  std::map<std::string, std::map<std::string, double>> rows_;
  std::map<std::string, MetricDirection> directions_;
  std::vector<std::string> metric_order_;
  std::vector<std::string> system_order_;
};

// CSV with header `metric,direction,system,score`. Direction accepts
// higher/lower (also up/down and HigherBetter/LowerBetter, any case).
ScoreTable parse_score_table(std::istream& in, const std::string& source);
ScoreTable load_score_table(const std::filesystem::path& path);
void write_score_table(std::ostream& out, const ScoreTable& table);

RankMap rank_systems(const ScoreTable& table, const std::string& metric,
                     const std::vector<std::string>& systems);

struct RankingReport {
  std::vector<std::string> systems;
  std::vector<std::string> reference_metrics;
  std::vector<std::string> candidate_metrics;
  std::map<std::string, RankMap> ranks;
  // Keyed by (candidate, reference); lookups through the accessors accept
  // either order.
  std::map<std::pair<std::string, std::string>, double> spearman;
  std::map<std::pair<std::string, std::string>, double> kendall;

  double spearman_between(const std::string& a, const std::string& b) const;
  double kendall_between(const std::string& a, const std::string& b) const;
};

RankingReport agreement_report(const ScoreTable& table,
                               const std::vector<std::string>& reference_metrics,
                               const std::vector<std::string>& candidate_metrics,
                               const std::vector<std::string>& systems);

std::string ranking_report_json(const RankingReport& report, const ScoreTable& table);
// Metric rows by system columns, each cell "score (rank)", followed by the
// correlation table.
std::string ranking_report_text(const RankingReport& report, const ScoreTable& table);

// Run configuration: {"runs": [{"system", "train_on", "test_on",
// "manifest"}]}. Relative manifest paths resolve against the config's
// directory.
std::vector<SystemRun> parse_run_config(const std::string& text, const std::string& source,
                                        const std::filesystem::path& base_dir);
std::vector<SystemRun> load_run_config(const std::filesystem::path& path);

struct SystemEvaluation {
  std::string system;
  DataDomain train_on = DataDomain::Synthetic;
  double self_wer = 0.0;
  double cross_wer = 0.0;
  DivergenceReport report;
};

// Pairs runs by (system, train_on) into exactly one self and one cross run
// each, then scores every manifest. Entries are sorted by (system, train_on).
std::vector<SystemEvaluation> evaluate_runs(const std::vector<SystemRun>& runs,
                                            const NormalizationPolicy& policy = {},
                                            std::size_t jobs = 1);

std::string evaluation_report_json(const std::vector<SystemEvaluation>& evaluations);

// Rows for each direction present: cross_wer[train=<domain>] and
// divergence[train=<domain>], both lower-is-better.
ScoreTable evaluation_score_table(const std::vector<SystemEvaluation>& evaluations);

}  // namespace shiftdiv
