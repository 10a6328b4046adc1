#include "shiftdiv/wer.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "json_util.hpp"
#include "shiftdiv/error.hpp"
#include "shiftdiv/parallel.hpp"
#include "text_util.hpp"

namespace shiftdiv {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_kept(unsigned char c) {
  if (c >= 0x80) return true;
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '\'' || is_space(c);
}

}  // namespace

std::vector<std::string> normalize(std::string_view text, const NormalizationPolicy& policy) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (policy.strip_punctuation && !is_kept(c)) continue;
    if (policy.lowercase && c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    cleaned.push_back(static_cast<char>(c));
  }

  std::vector<std::string> tokens;
  if (policy.collapse_whitespace) {
    std::size_t i = 0;
    while (i < cleaned.size()) {
      while (i < cleaned.size() && is_space(cleaned[i])) ++i;
      const std::size_t start = i;
      while (i < cleaned.size() && !is_space(cleaned[i])) ++i;
      if (i > start) tokens.emplace_back(cleaned.substr(start, i - start));
    }
    return tokens;
  }

  if (cleaned.empty()) return tokens;
  std::string current;
  for (char c : cleaned) {
    if (is_space(static_cast<unsigned char>(c))) {
      tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  tokens.push_back(std::move(current));
  return tokens;
}

char op_code(EditOp op) noexcept {
  switch (op) {
    case EditOp::Correct:
      return 'C';
    case EditOp::Substitution:
      return 'S';
    case EditOp::Deletion:
      return 'D';
    case EditOp::Insertion:
      return 'I';
  }
  return '?';
}

WerReport word_error_rate(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t cols = m + 1;

  // cost[i][j]: edits turning ref[0, i) into hyp[0, j).
  std::vector<std::size_t> cost((n + 1) * cols);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * cols + j]; };
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t ins = at(i, j - 1) + 1;
      const std::size_t del = at(i - 1, j) + 1;
      at(i, j) = std::min({diag, ins, del});
    }
  }

  WerReport report;
  report.ref_len = n;
  std::vector<AlignmentStep> steps;
  steps.reserve(n + m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        steps.push_back({same ? EditOp::Correct : EditOp::Substitution, ref[i - 1], hyp[j - 1]});
        if (!same) ++report.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      steps.push_back({EditOp::Insertion, std::nullopt, hyp[j - 1]});
      ++report.insertions;
      --j;
      continue;
    }
    steps.push_back({EditOp::Deletion, ref[i - 1], std::nullopt});
    ++report.deletions;
    --i;
  }
  std::reverse(steps.begin(), steps.end());
  report.alignment = std::move(steps);

  if (n > 0) {
    report.wer = static_cast<double>(report.errors()) / static_cast<double>(n);
  } else if (m > 0) {
    report.wer = std::numeric_limits<double>::infinity();
    report.undefined_ref = true;
  }
  return report;
}

CorpusWerReport corpus_wer(std::span<const UtterancePair> pairs, const NormalizationPolicy& policy,
                           std::size_t jobs) {
  if (pairs.empty()) throw InputError("no utterances to score");
  std::set<std::string_view> seen;
  for (const auto& p : pairs) {
    if (p.id.empty()) throw InputError("utterance with an empty id");
    if (!seen.insert(p.id).second) throw InputError("duplicate utterance id '" + p.id + "'");
  }

  std::vector<WerReport> scored(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    const auto ref = normalize(pairs[k].reference, policy);
    const auto hyp = normalize(pairs[k].hypothesis, policy);
    scored[k] = word_error_rate(ref, hyp);
  });

  CorpusWerReport out;
  std::size_t scored_errors = 0;
  std::size_t finite_count = 0;
  double finite_sum = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const WerReport& r = scored[k];
    out.substitutions += r.substitutions;
    out.deletions += r.deletions;
    out.insertions += r.insertions;
    out.ref_len += r.ref_len;
    if (r.ref_len > 0) scored_errors += r.errors();
    if (r.undefined_ref) {
      ++out.undefined_count;
    } else {
      finite_sum += r.wer;
      ++finite_count;
    }
    out.order.push_back(pairs[k].id);
    out.per_utterance.emplace(pairs[k].id, std::move(scored[k]));
  }

  if (out.ref_len > 0) {
    out.pooled_wer = static_cast<double>(scored_errors) / static_cast<double>(out.ref_len);
  } else {
    out.pooled_wer = out.errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  out.mean_utterance_wer = finite_count > 0 ? finite_sum / static_cast<double>(finite_count)
                                            : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<UtterancePair> parse_manifest(std::istream& in, const std::string& source) {
  using detail::json;
  std::vector<UtterancePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError(source, line_no, "malformed JSON line");
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "expected a JSON object");
    UtterancePair p;
    for (auto [key, slot] : {std::pair{"id", &p.id}, std::pair{"ref", &p.reference},
                             std::pair{"hyp", &p.hypothesis}}) {
      if (!obj.contains(key) || !obj[key].is_string()) {
        throw ParseError(source, line_no, std::string("missing string field '") + key + "'");
      }
      *slot = obj[key].get<std::string>();
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<UtterancePair> read_manifest(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_manifest(in, path.string());
}

void write_alignment_tsv(std::ostream& out, const CorpusWerReport& report) {
  for (const auto& id : report.order) {
    out << "# " << id << '\n';
    for (const auto& step : report.per_utterance.at(id).alignment) {
      out << op_code(step.op) << '\t' << step.ref.value_or("*") << '\t' << step.hyp.value_or("*")
          << '\n';
    }
  }
}

}  // namespace shiftdiv
