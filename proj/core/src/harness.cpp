#include "shiftdiv/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "shiftdiv/error.hpp"
#include "shiftdiv/parallel.hpp"
#include "text_util.hpp"

namespace shiftdiv {

const char* to_string(DataDomain domain) noexcept {
  return domain == DataDomain::Real ? "real" : "synthetic";
}

std::string SystemRun::label() const {
  return system + " (train=" + to_string(train_on) + ", test=" + to_string(test_on) + ")";
}

double evaluate_system(const SystemRun& run, const NormalizationPolicy& policy, std::size_t jobs) {
  const auto pairs = read_manifest(run.manifest_path);
  if (pairs.empty()) {
    throw InputError("manifest " + run.manifest_path.string() + " for " + run.label() +
                     " has no utterances");
  }
  return corpus_wer(pairs, policy, jobs).pooled_wer;
}

DivergenceReport wer_divergence_from_scores(double self_wer, double cross_wer,
                                            Direction direction) {
  if (std::isnan(self_wer) || std::isnan(cross_wer)) throw InputError("WER is NaN");
  if (self_wer < 0.0 || cross_wer < 0.0) throw InputError("WER must be non-negative");
  bool clamped = false;
  auto proxy = [&](double wer) {
    const double acc = 1.0 - wer;
    if (acc < 0.0) {
      clamped = true;
      return 0.0;
    }
    return acc;
  };
  const double acc_self = proxy(self_wer);
  const double acc_cross = proxy(cross_wer);
  return make_divergence_report(acc_self, acc_cross, direction, clamped);
}

namespace {

Direction direction_for(DataDomain train_on) {
  return train_on == DataDomain::Real ? Direction::TrainedOnFirst : Direction::TrainedOnSecond;
}

void check_pairing(const SystemRun& self_run, const SystemRun& cross_run) {
  if (self_run.train_on != cross_run.train_on) {
    throw ConfigurationError("runs " + self_run.label() + " and " + cross_run.label() +
                             " were trained on different domains");
  }
  if (self_run.test_on != self_run.train_on) {
    throw ConfigurationError("self run " + self_run.label() +
                             " must test on its training domain");
  }
  if (cross_run.test_on == cross_run.train_on) {
    throw ConfigurationError("cross run " + cross_run.label() +
                             " must test on the other domain");
  }
}

}  // namespace

DivergenceReport wer_divergence(const SystemRun& self_run, const SystemRun& cross_run,
                                const NormalizationPolicy& policy, std::size_t jobs) {
  check_pairing(self_run, cross_run);
  const double self_wer = evaluate_system(self_run, policy, jobs);
  const double cross_wer = evaluate_system(cross_run, policy, jobs);
  return wer_divergence_from_scores(self_wer, cross_wer, direction_for(self_run.train_on));
}

// ScoreTable

void ScoreTable::add(const std::string& metric, MetricDirection direction,
                     const std::string& system, double score) {
  if (metric.empty()) throw InputError("empty metric name");
  if (system.empty()) throw InputError("empty system name for metric '" + metric + "'");
  auto [dir_it, inserted] = directions_.emplace(metric, direction);
  if (!inserted && dir_it->second != direction) {
    throw InputError("metric '" + metric + "' declared with conflicting directions");
  }
  if (inserted) metric_order_.push_back(metric);
  auto& row = rows_[metric];
  if (!row.emplace(system, score).second) {
    throw InputError("duplicate score for (" + metric + ", " + system + ")");
  }
  if (std::find(system_order_.begin(), system_order_.end(), system) == system_order_.end()) {
    system_order_.push_back(system);
  }
}

MetricDirection ScoreTable::direction(const std::string& metric) const {
  auto it = directions_.find(metric);
  if (it == directions_.end()) throw LookupError("unknown metric '" + metric + "'");
  return it->second;
}

const std::map<std::string, double>& ScoreTable::row(const std::string& metric) const {
  auto it = rows_.find(metric);
  if (it == rows_.end()) throw LookupError("unknown metric '" + metric + "'");
  return it->second;
}

double ScoreTable::score(const std::string& metric, const std::string& system) const {
  const auto& r = row(metric);
  auto it = r.find(system);
  if (it == r.end()) {
    throw LookupError("metric '" + metric + "' has no score for system '" + system + "'");
  }
  return it->second;
}

std::vector<std::string> ScoreTable::metrics() const {
  std::vector<std::string> out;
  for (const auto& [metric, row] : rows_) out.push_back(metric);
  return out;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<MetricDirection> parse_direction(const std::string& text) {
  const std::string t = lower(text);
  if (t == "higher" || t == "up" || t == "higherbetter" || t == "higher_better")
    return MetricDirection::HigherBetter;
  if (t == "lower" || t == "down" || t == "lowerbetter" || t == "lower_better")
    return MetricDirection::LowerBetter;
  return std::nullopt;
}

const char* direction_name(MetricDirection d) {
  return d == MetricDirection::HigherBetter ? "higher" : "lower";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

ScoreTable parse_score_table(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  ScoreTable table;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (!fields) throw ParseError(source, line_no, "unterminated quote");
    if (!have_header) {
      const std::vector<std::string> expected{"metric", "direction", "system", "score"};
      if (*fields != expected) {
        throw ParseError(source, line_no, "header must be metric,direction,system,score");
      }
      have_header = true;
      continue;
    }
    if (fields->size() != 4) {
      throw ParseError(source, line_no,
                       "expected 4 fields, found " + std::to_string(fields->size()));
    }
    const auto& metric = (*fields)[0];
    const auto& dir_text = (*fields)[1];
    const auto& system = (*fields)[2];
    if (metric.empty()) throw ParseError(source, line_no, "missing metric name");
    if (dir_text.empty()) {
      throw ParseError(source, line_no, "missing direction for metric '" + metric + "'");
    }
    auto direction = parse_direction(dir_text);
    if (!direction) {
      throw ParseError(source, line_no,
                       "direction '" + dir_text + "' is not one of higher/lower");
    }
    if (system.empty()) throw ParseError(source, line_no, "missing system name");
    auto score = detail::parse_double((*fields)[3]);
    if (!score || !std::isfinite(*score)) {
      throw ParseError(source, line_no, "non-numeric score '" + (*fields)[3] + "'");
    }
    try {
      table.add(metric, *direction, system, *score);
    } catch (const InputError& e) {
      throw ParseError(source, line_no, e.what());
    }
    ++rows;
  }
  if (!have_header) throw ParseError(source, 0, "empty file, expected header");
  if (rows == 0) throw ParseError(source, line_no, "no score rows after header");
  return table;
}

ScoreTable load_score_table(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_score_table(in, path.string());
}

void write_score_table(std::ostream& out, const ScoreTable& table) {
  out << "metric,direction,system,score\n";
  for (const auto& metric : table.metric_order()) {
    for (const auto& [system, score] : table.row(metric)) {
      out << csv_field(metric) << ',' << direction_name(table.direction(metric)) << ','
          << csv_field(system) << ',' << detail::format_double(score) << '\n';
    }
  }
}

RankMap rank_systems(const ScoreTable& table, const std::string& metric,
                     const std::vector<std::string>& systems) {
  const auto direction = table.direction(metric);
  if (systems.empty()) throw InputError("no systems to rank");
  std::vector<double> scores;
  for (const auto& s : systems) scores.push_back(table.score(metric, s));
  const auto ranks = average_ranks(scores, direction == MetricDirection::HigherBetter);
  RankMap out;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (!out.emplace(systems[i], ranks[i]).second) {
      throw InputError("system '" + systems[i] + "' listed twice");
    }
  }
  return out;
}

namespace {

template <typename Map>
double symmetric_lookup(const Map& m, const std::string& a, const std::string& b,
                        const char* what) {
  if (auto it = m.find({a, b}); it != m.end()) return it->second;
  if (auto it = m.find({b, a}); it != m.end()) return it->second;
  throw LookupError(std::string("no ") + what + " correlation between '" + a + "' and '" + b +
                    "'");
}

}  // namespace

double RankingReport::spearman_between(const std::string& a, const std::string& b) const {
  return symmetric_lookup(spearman, a, b, "Spearman");
}

double RankingReport::kendall_between(const std::string& a, const std::string& b) const {
  return symmetric_lookup(kendall, a, b, "Kendall");
}

RankingReport agreement_report(const ScoreTable& table,
                               const std::vector<std::string>& reference_metrics,
                               const std::vector<std::string>& candidate_metrics,
                               const std::vector<std::string>& systems) {
  if (reference_metrics.empty()) throw InputError("no reference metrics given");
  if (candidate_metrics.empty()) throw InputError("no candidate metrics given");

  RankingReport report;
  report.systems = systems;
  report.reference_metrics = reference_metrics;
  report.candidate_metrics = candidate_metrics;
  for (const auto* group : {&reference_metrics, &candidate_metrics}) {
    for (const auto& metric : *group) {
      if (!report.ranks.contains(metric)) {
        report.ranks.emplace(metric, rank_systems(table, metric, systems));
      }
    }
  }
  for (const auto& candidate : candidate_metrics) {
    for (const auto& reference : reference_metrics) {
      const auto& a = report.ranks.at(candidate);
      const auto& b = report.ranks.at(reference);
      report.spearman[{candidate, reference}] = spearman(a, b);
      report.kendall[{candidate, reference}] = kendall(a, b);
    }
  }
  return report;
}

std::string ranking_report_json(const RankingReport& report, const ScoreTable& table) {
  using detail::json;
  json scores = json::object();
  json directions = json::object();
  json ranks = json::object();
  for (const auto& [metric, rank_map] : report.ranks) {
    directions[metric] = direction_name(table.direction(metric));
    for (const auto& [system, rank] : rank_map) {
      scores[metric][system] = table.score(metric, system);
      ranks[metric][system] = rank;
    }
  }
  json correlations = json::array();
  for (const auto& candidate : report.candidate_metrics) {
    for (const auto& reference : report.reference_metrics) {
      correlations.push_back(
          {{"candidate", candidate},
           {"reference", reference},
           {"spearman", detail::number_or_null(report.spearman.at({candidate, reference}))},
           {"kendall", detail::number_or_null(report.kendall.at({candidate, reference}))}});
    }
  }
  json doc{{"systems", report.systems},
           {"reference_metrics", report.reference_metrics},
           {"candidate_metrics", report.candidate_metrics},
           {"directions", directions},
           {"scores", scores},
           {"ranks", ranks},
           {"correlations", correlations}};
  return doc.dump(2) + "\n";
}

namespace {

// Code points, so UTF-8 arrows do not skew the columns.
std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++w;
  }
  return w;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string format_rank(double rank) {
  if (rank == std::floor(rank)) return std::to_string(static_cast<long long>(rank));
  return detail::format_double(rank);
}

std::string format_fixed(double v, int precision) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

void write_grid(std::ostream& out, const std::vector<std::vector<std::string>>& grid) {
  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
  }
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c > 0) out << " | ";
      out << (c + 1 == grid[r].size() ? grid[r][c] : pad(grid[r][c], widths[c]));
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 3 * (widths.size() - 1), '-') << '\n';
    }
  }
}

}  // namespace

std::string ranking_report_text(const RankingReport& report, const ScoreTable& table) {
  std::ostringstream out;

  std::vector<std::vector<std::string>> scores{{"Metric"}};
  scores[0].insert(scores[0].end(), report.systems.begin(), report.systems.end());
  std::vector<std::string> rows = report.reference_metrics;
  for (const auto& m : report.candidate_metrics) {
    if (std::find(rows.begin(), rows.end(), m) == rows.end()) rows.push_back(m);
  }
  for (const auto& metric : rows) {
    const bool higher = table.direction(metric) == MetricDirection::HigherBetter;
    std::vector<std::string> line{metric + (higher ? " ↑" : " ↓")};
    for (const auto& system : report.systems) {
      line.push_back(detail::format_double(table.score(metric, system)) + " (" +
                     format_rank(report.ranks.at(metric).at(system)) + ")");
    }
    scores.push_back(std::move(line));
  }
  write_grid(out, scores);

  out << "\nRank agreement (Spearman / Kendall)\n";
  std::vector<std::vector<std::string>> corr{{"Candidate"}};
  corr[0].insert(corr[0].end(), report.reference_metrics.begin(), report.reference_metrics.end());
  for (const auto& candidate : report.candidate_metrics) {
    std::vector<std::string> line{candidate};
    for (const auto& reference : report.reference_metrics) {
      line.push_back(format_fixed(report.spearman.at({candidate, reference}), 3) + " / " +
                     format_fixed(report.kendall.at({candidate, reference}), 3));
    }
    corr.push_back(std::move(line));
  }
  write_grid(out, corr);
  return out.str();
}

// Run configuration

namespace {

DataDomain parse_domain(const detail::json& node, const std::string& field) {
  if (!node.is_string()) throw InputError("field '" + field + "': must be \"real\" or \"synthetic\"");
  const std::string v = lower(node.get<std::string>());
  if (v == "real") return DataDomain::Real;
  if (v == "synthetic" || v == "synth") return DataDomain::Synthetic;
  throw InputError("field '" + field + "': must be \"real\" or \"synthetic\", got \"" + v + "\"");
}

}  // namespace

std::vector<SystemRun> parse_run_config(const std::string& text, const std::string& source,
                                        const std::filesystem::path& base_dir) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array()) {
      throw InputError("field 'runs': expected an array of run objects");
    }
    std::vector<SystemRun> runs;
    const auto& list = doc["runs"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string prefix = "runs[" + std::to_string(i) + "]";
      const auto& node = list[i];
      if (!node.is_object()) throw InputError("field '" + prefix + "': must be an object");
      for (const char* key : {"system", "train_on", "test_on", "manifest"}) {
        if (!node.contains(key)) throw InputError("field '" + prefix + "." + key + "': missing");
      }
      if (!node["system"].is_string() || node["system"].get<std::string>().empty()) {
        throw InputError("field '" + prefix + ".system': must be a non-empty string");
      }
      if (!node["manifest"].is_string()) {
        throw InputError("field '" + prefix + ".manifest': must be a string");
      }
      SystemRun run;
      run.system = node["system"].get<std::string>();
      run.train_on = parse_domain(node["train_on"], prefix + ".train_on");
      run.test_on = parse_domain(node["test_on"], prefix + ".test_on");
      std::filesystem::path manifest = node["manifest"].get<std::string>();
      run.manifest_path = manifest.is_absolute() ? manifest : base_dir / manifest;
      runs.push_back(std::move(run));
    }
    if (runs.empty()) throw InputError("field 'runs': is empty");
    return runs;
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
}

std::vector<SystemRun> load_run_config(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string(), path.parent_path());
}

std::vector<SystemEvaluation> evaluate_runs(const std::vector<SystemRun>& runs,
                                            const NormalizationPolicy& policy, std::size_t jobs) {
  if (runs.empty()) throw ConfigurationError("no runs configured");

  struct Slots {
    const SystemRun* self = nullptr;
    const SystemRun* cross = nullptr;
  };
  std::map<std::pair<std::string, DataDomain>, Slots> groups;
  for (const auto& run : runs) {
    auto& slots = groups[{run.system, run.train_on}];
    const bool is_self = run.test_on == run.train_on;
    const SystemRun*& slot = is_self ? slots.self : slots.cross;
    if (slot != nullptr) {
      throw ConfigurationError("run " + run.label() + " repeats the " +
                               (is_self ? "self" : "cross") + " run " + slot->label() +
                               "; each system and training domain needs one self run and one "
                               "cross run");
    }
    slot = &run;
  }
  for (const auto& [key, slots] : groups) {
    const SystemRun* present = slots.self ? slots.self : slots.cross;
    if (!slots.self || !slots.cross) {
      throw ConfigurationError("run " + present->label() + " has no matching " +
                               (slots.self ? "cross" : "self") + " run for system '" + key.first +
                               "' trained on " + to_string(key.second));
    }
  }

  std::vector<std::pair<const SystemRun*, const SystemRun*>> ordered;
  for (const auto& [key, slots] : groups) ordered.emplace_back(slots.self, slots.cross);

  std::vector<double> wers(ordered.size() * 2);
  parallel_for(wers.size(), jobs, [&](std::size_t k) {
    const auto& pair = ordered[k / 2];
    wers[k] = evaluate_system(k % 2 == 0 ? *pair.first : *pair.second, policy);
  });

  std::vector<SystemEvaluation> out;
  for (std::size_t g = 0; g < ordered.size(); ++g) {
    const SystemRun& self = *ordered[g].first;
    SystemEvaluation e;
    e.system = self.system;
    e.train_on = self.train_on;
    e.self_wer = wers[2 * g];
    e.cross_wer = wers[2 * g + 1];
    e.report = wer_divergence_from_scores(e.self_wer, e.cross_wer, direction_for(self.train_on));
    out.push_back(std::move(e));
  }
  return out;
}

std::string evaluation_report_json(const std::vector<SystemEvaluation>& evaluations) {
  using detail::json;
  json entries = json::array();
  bool any_clamped = false;
  for (const auto& e : evaluations) {
    json entry = detail::to_json(e.report);
    entry["system"] = e.system;
    entry["train_on"] = to_string(e.train_on);
    entry["self_wer"] = detail::number_or_null(e.self_wer);
    entry["cross_wer"] = detail::number_or_null(e.cross_wer);
    any_clamped = any_clamped || e.report.clamped;
    entries.push_back(std::move(entry));
  }
  json doc{{"evaluations", entries}, {"any_clamped", any_clamped}};
  return doc.dump(2) + "\n";
}

ScoreTable evaluation_score_table(const std::vector<SystemEvaluation>& evaluations) {
  ScoreTable table;
  for (const auto& e : evaluations) {
    const std::string suffix = std::string("[train=") + to_string(e.train_on) + "]";
    if (std::isfinite(e.cross_wer)) {
      table.add("cross_wer" + suffix, MetricDirection::LowerBetter, e.system, e.cross_wer);
    }
    table.add("divergence" + suffix, MetricDirection::LowerBetter, e.system, e.report.divergence);
  }
  return table;
}

}  // namespace shiftdiv
