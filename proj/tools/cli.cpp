#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shiftdiv/dataset_io.hpp"
#include "shiftdiv/error.hpp"
#include "shiftdiv/harness.hpp"
#include "shiftdiv/simulate.hpp"
#include "shiftdiv/wer.hpp"

namespace shiftdiv::cli {

namespace {

struct SimulateOptions {
  std::string real_spec;
  std::string synth_spec;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::string out;
  std::string dump_dir;
  TrainConfig train;
};

struct WerOptions {
  std::string manifest;
  bool no_lowercase = false;
  bool keep_punct = false;
  std::string align_out;
};

struct EvaluateOptions {
  std::string runs;
  std::string out;
  std::string scores_out;
  bool no_lowercase = false;
  bool keep_punct = false;
};

struct RankOptions {
  std::string scores;
  std::vector<std::string> reference;
  std::vector<std::string> candidates;
  std::vector<std::string> systems;
  std::vector<std::string> exclude{"Ground Truth"};
  std::string out = "report";
};

std::string fixed(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write: " + path.string());
  f << content;
  if (!f) throw InputError("failed writing: " + path.string());
}

std::string summary_line(const char* name, const char* trained_on, const DivergenceReport& r,
                         const std::optional<double>& analytic) {
  std::ostringstream os;
  os << name << " (train=" << trained_on << "): acc_self=" << fixed(r.acc_self)
     << " acc_cross=" << fixed(r.acc_cross) << " divergence=" << fixed(r.divergence);
  if (analytic) os << " analytic=" << fixed(*analytic);
  return os.str();
}

int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  const auto real = read_spec_json(opt.real_spec);
  const auto synth = read_spec_json(opt.synth_spec);
  if (opt.n == 0) throw InputError("--n must be positive");

  const auto result = asymmetry_experiment(real, synth, opt.n, opt.train, opt.seed);
  write_file(opt.out, asymmetry_result_json(result));

  if (!opt.dump_dir.empty()) {
    const std::filesystem::path dir = opt.dump_dir;
    if (!std::filesystem::is_directory(dir)) {
      throw InputError("--dump-datasets directory does not exist: " + dir.string());
    }
    const auto data = experiment_data(real, synth, opt.n, opt.seed);
    write_dataset_csv(dir / "real_train.csv", data.real_train);
    write_dataset_csv(dir / "real_eval.csv", data.real_eval);
    write_dataset_csv(dir / "synth_train.csv", data.synth_train);
    write_dataset_csv(dir / "synth_eval.csv", data.synth_eval);
  }

  out << summary_line("forward ", "real", result.forward, result.analytic_forward) << '\n';
  out << summary_line("backward", "synthetic", result.backward, result.analytic_backward) << '\n';
  err << "wrote " << opt.out << '\n';
  return kExitOk;
}

NormalizationPolicy policy_from(bool no_lowercase, bool keep_punct) {
  NormalizationPolicy policy;
  policy.lowercase = !no_lowercase;
  policy.strip_punctuation = !keep_punct;
  return policy;
}

int run_wer(const WerOptions& opt, std::size_t jobs, std::ostream& out, std::ostream& err) {
  const auto pairs = read_manifest(opt.manifest);
  if (pairs.empty()) throw InputError(opt.manifest + ": manifest has no utterances");
  const auto report = corpus_wer(pairs, policy_from(opt.no_lowercase, opt.keep_punct), jobs);

  out << "utterances " << pairs.size() << '\n';
  out << "pooled_wer " << fixed(report.pooled_wer) << '\n';
  out << "mean_utterance_wer " << fixed(report.mean_utterance_wer) << '\n';
  out << "errors " << report.errors() << " / " << report.ref_len << " (sub "
      << report.substitutions << ", del " << report.deletions << ", ins " << report.insertions
      << ")\n";
  if (report.undefined_count > 0) {
    err << "warning: " << report.undefined_count
        << " utterance(s) have an empty reference and a non-empty hypothesis; excluded from "
           "pooled and mean WER\n";
  }

  if (!opt.align_out.empty()) {
    std::ofstream f(opt.align_out, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write: " + opt.align_out);
    write_alignment_tsv(f, report);
  }
  return kExitOk;
}

int run_evaluate(const EvaluateOptions& opt, std::size_t jobs, std::ostream& out,
                 std::ostream& err) {
  const auto runs = load_run_config(opt.runs);
  const auto evaluations =
      evaluate_runs(runs, policy_from(opt.no_lowercase, opt.keep_punct), jobs);
  write_file(opt.out, evaluation_report_json(evaluations));
  if (!opt.scores_out.empty()) {
    std::ostringstream csv;
    write_score_table(csv, evaluation_score_table(evaluations));
    write_file(opt.scores_out, csv.str());
  }

  for (const auto& e : evaluations) {
    out << e.system << " (train=" << to_string(e.train_on) << "): self_wer=" << fixed(e.self_wer)
        << " cross_wer=" << fixed(e.cross_wer) << " divergence=" << fixed(e.report.divergence)
        << (e.report.clamped ? " [clamped]" : "") << '\n';
  }
  err << "wrote " << opt.out << '\n';
  return kExitOk;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& item : items) {
    if (!s.empty()) s += ", ";
    s += item;
  }
  return s;
}

int run_rank(const RankOptions& opt, std::ostream& out, std::ostream& err) {
  const auto table = load_score_table(opt.scores);

  for (const auto* group : {&opt.reference, &opt.candidates}) {
    for (const auto& metric : *group) {
      if (!table.has_metric(metric)) {
        throw LookupError("unknown metric '" + metric +
                          "'; available metrics: " + join(table.metric_order()));
      }
    }
  }

  std::vector<std::string> systems = opt.systems;
  if (systems.empty()) {
    // Systems scored under every requested metric, minus excluded rows.
    for (const auto& system : table.systems()) {
      if (std::find(opt.exclude.begin(), opt.exclude.end(), system) != opt.exclude.end()) continue;
      bool everywhere = true;
      for (const auto* group : {&opt.reference, &opt.candidates}) {
        for (const auto& metric : *group) everywhere = everywhere && table.row(metric).contains(system);
      }
      if (everywhere) systems.push_back(system);
    }
    if (systems.size() < 2) throw InputError("fewer than 2 systems are scored under every metric");
  }

  const auto report = agreement_report(table, opt.reference, opt.candidates, systems);
  const std::string json_path = opt.out + ".json";
  const std::string text_path = opt.out + ".txt";
  write_file(json_path, ranking_report_json(report, table));
  write_file(text_path, ranking_report_text(report, table));

  for (const auto& candidate : opt.candidates) {
    for (const auto& reference : opt.reference) {
      out << "spearman(" << candidate << ", " << reference
          << ") = " << fixed(report.spearman.at({candidate, reference})) << '\n';
    }
  }
  err << "wrote " << json_path << " and " << text_path << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classifier-based distributional shift and TTS evaluation toolkit", "shiftdiv"};
  app.require_subcommand(1);

  std::size_t jobs = 1;
  app.add_option("--jobs,-j", jobs, "Worker threads for parallel scoring")
      ->envname("SHIFTDIV_JOBS")
      ->check(CLI::PositiveNumber);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Train-on-real vs train-on-synthetic pseudo-divergence on Gaussian specs");
  simulate->add_option("--real-spec", sim.real_spec, "Real-data spec (JSON)")->required();
  simulate->add_option("--synth-spec", sim.synth_spec, "Synthetic-data spec (JSON)")->required();
  simulate->add_option("--n", sim.n, "Samples per class for each dataset")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Experiment seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output JSON report")->required();
  simulate->add_option("--dump-datasets", sim.dump_dir,
                       "Existing directory that receives the four sampled datasets as CSV");
  simulate->add_option("--lr", sim.train.learning_rate, "Initial learning rate")
      ->capture_default_str();
  simulate->add_option("--max-iter", sim.train.max_iterations, "Gradient descent iterations")
      ->capture_default_str();
  simulate->add_option("--tol", sim.train.convergence_tolerance, "Gradient-norm stopping threshold")
      ->capture_default_str();
  simulate->add_option("--l2", sim.train.l2_penalty, "L2 penalty")->capture_default_str();
  simulate->add_option("--init-seed", sim.train.rng_seed, "Weight jitter seed (0 = zero init)")
      ->capture_default_str();

  WerOptions wer;
  auto* wer_cmd = app.add_subcommand("wer", "Score a JSON Lines transcript manifest");
  wer_cmd->add_option("--manifest", wer.manifest, "Manifest with id/ref/hyp per line")->required();
  wer_cmd->add_flag("--no-lowercase", wer.no_lowercase, "Keep original casing");
  wer_cmd->add_flag("--keep-punct", wer.keep_punct, "Keep punctuation");
  wer_cmd->add_option("--align-out", wer.align_out, "Write op/ref/hyp alignment rows (TSV)");

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand(
      "evaluate", "WER-based pseudo-divergence for each system from a run configuration");
  evaluate->add_option("--runs", eval.runs, "Run configuration (JSON)")->required();
  evaluate->add_option("--out", eval.out, "Output report.json")->required();
  evaluate->add_option("--scores-out", eval.scores_out,
                       "Also write a metric,direction,system,score CSV for `rank`");
  evaluate->add_flag("--no-lowercase", eval.no_lowercase, "Keep original casing");
  evaluate->add_flag("--keep-punct", eval.keep_punct, "Keep punctuation");

  RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "Rank systems and measure metric agreement");
  rank_cmd->add_option("--scores", rank.scores, "Score table CSV")->required();
  rank_cmd->add_option("--reference", rank.reference, "Reference metrics (comma separated)")
      ->required()
      ->delimiter(',');
  rank_cmd->add_option("--candidates", rank.candidates, "Candidate metrics (comma separated)")
      ->required()
      ->delimiter(',');
  rank_cmd->add_option("--systems", rank.systems, "Systems to rank (default: all scored)")
      ->delimiter(',');
  rank_cmd->add_option("--exclude", rank.exclude, "Systems left out of the default set")
      ->delimiter(',')
      ->capture_default_str();
  rank_cmd->add_option("--out", rank.out, "Output prefix for <prefix>.json and <prefix>.txt")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    if (*simulate) return run_simulate(sim, out, err);
    if (*wer_cmd) return run_wer(wer, jobs, out, err);
    if (*evaluate) return run_evaluate(eval, jobs, out, err);
    if (*rank_cmd) return run_rank(rank, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace shiftdiv::cli
