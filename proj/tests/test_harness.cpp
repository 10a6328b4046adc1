#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "shiftdiv/error.hpp"
#include "shiftdiv/harness.hpp"

using namespace shiftdiv;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSystems{"StyleTTS", "MQTTS", "YourTTS"};

ScoreTable bundled_scores() {
  return load_score_table(fs::path(SHIFTDIV_FIXTURE_DIR) / "tts_metric_scores.csv");
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("shiftdiv_harness_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }

 private:
  fs::path path_;
};

std::size_t parse_error_line(const std::string& csv) {
  std::istringstream in(csv);
  try {
    parse_score_table(in, "scores.csv");
  } catch (const ParseError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST(ScoreTable, LoadsBundledTable) {
  const auto t = bundled_scores();
  EXPECT_DOUBLE_EQ(t.score("MOS-N", "StyleTTS"), 3.68);
  EXPECT_DOUBLE_EQ(t.score("MOS-N", "MQTTS"), 3.66);
  EXPECT_DOUBLE_EQ(t.score("MOS-N", "YourTTS"), 3.59);
  EXPECT_EQ(t.direction("WER"), MetricDirection::LowerBetter);
  EXPECT_EQ(t.direction("MOSNet"), MetricDirection::HigherBetter);
  EXPECT_EQ(t.metrics().size(), 6u);
  EXPECT_EQ(t.systems().front(), "Ground Truth");
}

TEST(ScoreTable, ParseErrorsCiteTheLine) {
  EXPECT_THROW(
      {
        std::istringstream empty("");
        parse_score_table(empty, "scores.csv");
      },
      ParseError);
  EXPECT_EQ(parse_error_line("metric,direction,system,score\n"
                             "WER,lower,MQTTS,29.35\n"
                             "WER,lower,MQTTS,30\n"),
            3u);
  EXPECT_EQ(parse_error_line("metric,direction,system,score\nWER,,MQTTS,29.35\n"), 2u);
  EXPECT_EQ(parse_error_line("metric,direction,system,score\nWER,lower,MQTTS,abc\n"), 2u);
  EXPECT_EQ(parse_error_line("metric,dir,system,score\n"), 1u);
  EXPECT_EQ(parse_error_line("metric,direction,system,score\n"
                             "WER,lower,A,1\nWER,higher,B,2\n"),
            3u);
  EXPECT_THROW(load_score_table("/nonexistent/scores.csv"), InputMissingError);
}

TEST(ScoreTable, WriteThenParseRoundTrips) {
  const auto t = bundled_scores();
  std::stringstream buf;
  write_score_table(buf, t);
  const auto back = parse_score_table(buf, "mem");
  for (const auto& metric : t.metrics()) {
    EXPECT_EQ(back.direction(metric), t.direction(metric));
    EXPECT_EQ(back.row(metric), t.row(metric));
  }
}

TEST(RankSystems, BundledTableRanks) {
  const auto t = bundled_scores();
  const std::vector<std::pair<std::string, std::vector<double>>> expected{
      {"WER", {1, 3, 2}},      {"SpeechLMScore", {3, 1, 2}}, {"MOSNet", {1, 3, 2}},
      {"MOS-N", {1, 2, 3}},    {"MOS-I", {1, 2, 3}},         {"Ours 10h", {1, 2, 3}},
  };
  for (const auto& [metric, ranks] : expected) {
    const auto got = rank_systems(t, metric, kSystems);
    for (std::size_t i = 0; i < kSystems.size(); ++i) {
      EXPECT_DOUBLE_EQ(got.at(kSystems[i]), ranks[i]) << metric << " " << kSystems[i];
    }
  }
}

TEST(RankSystems, MissingScoreIsLookupError) {
  const auto t = bundled_scores();
  EXPECT_THROW(rank_systems(t, "MOS-I", {"Ground Truth", "StyleTTS"}), LookupError);
  EXPECT_THROW(rank_systems(t, "MOS-X", kSystems), LookupError);
}

TEST(AgreementReport, BundledTableCorrelations) {
  const auto report = agreement_report(bundled_scores(), {"MOS-N"},
                                       {"Ours 10h", "WER", "SpeechLMScore", "MOSNet"}, kSystems);
  EXPECT_DOUBLE_EQ(report.spearman_between("Ours 10h", "MOS-N"), 1.0);
  EXPECT_DOUBLE_EQ(report.spearman_between("WER", "MOS-N"), 0.5);
  EXPECT_DOUBLE_EQ(report.spearman_between("SpeechLMScore", "MOS-N"), -0.5);
  EXPECT_DOUBLE_EQ(report.spearman_between("MOSNet", "MOS-N"), 0.5);
  EXPECT_DOUBLE_EQ(report.spearman_between("MOS-N", "WER"), 0.5);
  EXPECT_NEAR(report.kendall_between("WER", "MOS-N"), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(report.kendall_between("Ours 10h", "MOS-N"), 1.0);
}

TEST(AgreementReport, MetricAgreesWithItself) {
  const auto report = agreement_report(bundled_scores(), {"MOS-N"}, {"MOS-N"}, kSystems);
  EXPECT_DOUBLE_EQ(report.spearman_between("MOS-N", "MOS-N"), 1.0);
}

TEST(AgreementReport, OutputsAreDeterministic) {
  const auto t = bundled_scores();
  const auto report = agreement_report(t, {"MOS-N", "MOS-I"}, {"Ours 10h", "WER"}, kSystems);
  EXPECT_EQ(ranking_report_json(report, t), ranking_report_json(report, t));
  const auto doc = nlohmann::json::parse(ranking_report_json(report, t));
  EXPECT_TRUE(doc.is_object());
  const auto text = ranking_report_text(report, t);
  EXPECT_NE(text.find("StyleTTS"), std::string::npos);
  EXPECT_NE(text.find("Spearman"), std::string::npos);
}

TEST(WerDivergence, FromScores) {
  const auto a = wer_divergence_from_scores(0.10, 0.25, Direction::TrainedOnSecond);
  EXPECT_NEAR(a.divergence, 0.15, 1e-12);
  EXPECT_FALSE(a.clamped);
  const auto b = wer_divergence_from_scores(0.2, 0.2, Direction::TrainedOnFirst);
  EXPECT_DOUBLE_EQ(b.divergence, 0.0);
  const auto c = wer_divergence_from_scores(0.2, 1.5, Direction::TrainedOnSecond);
  EXPECT_NEAR(c.divergence, 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(c.acc_cross, 0.0);
  EXPECT_TRUE(c.clamped);
  EXPECT_THROW(wer_divergence_from_scores(-0.1, 0.2, Direction::TrainedOnFirst), InputError);
  EXPECT_THROW(wer_divergence_from_scores(std::nan(""), 0.2, Direction::TrainedOnFirst),
               InputError);
}

TEST(EvaluateSystem, ManifestWer) {
  TempDir dir;
  const auto perfect = dir.write("perfect.jsonl", "{\"id\":\"a\",\"ref\":\"Hi there.\",\"hyp\":\"hi there\"}\n");
  const auto third = dir.write("third.jsonl", "{\"id\":\"a\",\"ref\":\"one two three\",\"hyp\":\"one too three\"}\n");
  EXPECT_DOUBLE_EQ(evaluate_system({"X", DataDomain::Synthetic, DataDomain::Synthetic, perfect}), 0.0);
  EXPECT_NEAR(evaluate_system({"X", DataDomain::Synthetic, DataDomain::Real, third}), 1.0 / 3.0,
              1e-12);
  EXPECT_THROW(evaluate_system({"X", DataDomain::Real, DataDomain::Real, dir.path() / "missing.jsonl"}),
               InputMissingError);
}

TEST(WerDivergence, PairsRunsAndChecksDirections) {
  TempDir dir;
  const auto self = dir.write("self.jsonl", "{\"id\":\"a\",\"ref\":\"a b c d\",\"hyp\":\"a b c d\"}\n");
  const auto cross = dir.write("cross.jsonl", "{\"id\":\"a\",\"ref\":\"a b c d\",\"hyp\":\"a b x d\"}\n");
  const SystemRun s{"X", DataDomain::Synthetic, DataDomain::Synthetic, self};
  const SystemRun c{"X", DataDomain::Synthetic, DataDomain::Real, cross};
  const auto r = wer_divergence(s, c);
  EXPECT_NEAR(r.divergence, 0.25, 1e-12);
  EXPECT_EQ(r.direction, Direction::TrainedOnSecond);
  EXPECT_THROW(wer_divergence(c, s), ConfigurationError);
  const SystemRun real_cross{"X", DataDomain::Real, DataDomain::Synthetic, cross};
  EXPECT_THROW(wer_divergence(s, real_cross), ConfigurationError);
}

TEST(RunConfig, ParsesAndResolvesPaths) {
  const auto runs = load_run_config(fs::path(SHIFTDIV_FIXTURE_DIR) / "tts" / "runs.json");
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[0].system, "StyleTTS");
  EXPECT_TRUE(fs::exists(runs[0].manifest_path));
  EXPECT_EQ(runs[1].test_on, DataDomain::Real);
}

TEST(RunConfig, ErrorsNameTheField) {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_run_config(text, "runs.json", ".");
    } catch (const ParseError& e) {
      return e.what();
    }
    return "no error";
  };
  EXPECT_NE(message(R"({"runs":[{"system":"A","train_on":"real","test_on":"moon","manifest":"m"}]})")
                .find("runs[0].test_on"),
            std::string::npos);
  EXPECT_NE(message(R"({"runs":[{"system":"A","train_on":"real","test_on":"real"}]})")
                .find("manifest"),
            std::string::npos);
  EXPECT_NE(message(R"({"runs":[]})").find("runs"), std::string::npos);
  EXPECT_NE(message("[").find("runs.json"), std::string::npos);
}

TEST(EvaluateRuns, BundledRunsProduceOneEvaluationPerSystem) {
  const auto runs = load_run_config(fs::path(SHIFTDIV_FIXTURE_DIR) / "tts" / "runs.json");
  const auto evals = evaluate_runs(runs);
  ASSERT_EQ(evals.size(), 2u);
  EXPECT_EQ(evals[0].system, "StyleTTS");
  EXPECT_EQ(evals[1].system, "YourTTS");
  for (const auto& e : evals) {
    EXPECT_EQ(e.report.direction, Direction::TrainedOnSecond);
    EXPECT_NEAR(e.report.divergence, std::abs(e.self_wer - e.cross_wer), 1e-12);
  }
  EXPECT_EQ(evaluation_report_json(evals), evaluation_report_json(evaluate_runs(runs, {}, 3)));
  const auto table = evaluation_score_table(evals);
  EXPECT_TRUE(table.has_metric("divergence[train=synthetic]"));
  EXPECT_TRUE(table.has_metric("cross_wer[train=synthetic]"));
}

TEST(EvaluateRuns, PairingErrorsNameTheRun) {
  const SystemRun a{"A", DataDomain::Real, DataDomain::Real, "a.jsonl"};
  const SystemRun b{"A", DataDomain::Real, DataDomain::Real, "b.jsonl"};
  try {
    evaluate_runs({a, b});
    FAIL() << "expected a configuration error";
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("A (train=real, test=real)"), std::string::npos);
  }
  EXPECT_THROW(evaluate_runs({a}), ConfigurationError);
  EXPECT_THROW(evaluate_runs({}), ConfigurationError);
}
