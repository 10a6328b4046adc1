#pragma once

// Word error rate: text normalization, Levenshtein alignment with an
// S/D/I breakdown, and corpus aggregation over JSON Lines manifests.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftdiv {

struct NormalizationPolicy {
  bool lowercase = true;
  // Drops every character other than letters, digits, apostrophes and
  // whitespace. Bytes >= 0x80 (UTF-8 sequences) are treated as letters.
  bool strip_punctuation = true;
  // When off, every whitespace character separates tokens, so runs of
  // whitespace produce empty tokens.
  bool collapse_whitespace = true;
};

std::vector<std::string> normalize(std::string_view text, const NormalizationPolicy& policy = {});

enum class EditOp { Correct, Substitution, Deletion, Insertion };

// Single-letter code used in alignment exports: C, S, D, I.
char op_code(EditOp op) noexcept;

struct AlignmentStep {
  EditOp op = EditOp::Correct;
  std::optional<std::string> ref;
  std::optional<std::string> hyp;

  bool operator==(const AlignmentStep&) const = default;
};

struct WerReport {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;
  // (S + D + I) / ref_len. For an empty reference: 0 when the hypothesis is
  // empty too, +infinity otherwise (with undefined_ref set).
  double wer = 0.0;
  bool undefined_ref = false;
  std::vector<AlignmentStep> alignment;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
};

// Unit-cost Levenshtein alignment. Backtrace ties prefer the diagonal
// (match or substitution), then insertion, then deletion.
WerReport word_error_rate(std::span<const std::string> ref, std::span<const std::string> hyp);

struct UtterancePair {
  std::string id;
  std::string reference;
  std::string hypothesis;
};

struct CorpusWerReport {
  std::map<std::string, WerReport> per_utterance;
  // Manifest order, for stable exports.
  std::vector<std::string> order;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;
  // Errors over reference words, restricted to utterances with a non-empty
  // reference.
  double pooled_wer = 0.0;
  // Unweighted mean over utterances with a finite WER.
  double mean_utterance_wer = 0.0;
  std::size_t undefined_count = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
};

// Throws InputError on an empty list or duplicate ids.
CorpusWerReport corpus_wer(std::span<const UtterancePair> pairs,
                           const NormalizationPolicy& policy = {}, std::size_t jobs = 1);

// One JSON object per line: {"id": str, "ref": str, "hyp": str}. Blank lines
// are skipped; anything else malformed raises ParseError with its line.
std::vector<UtterancePair> parse_manifest(std::istream& in, const std::string& source);
std::vector<UtterancePair> read_manifest(const std::filesystem::path& path);

// Tab-separated op, ref_token, hyp_token rows ("*" marks an absent token).
// Each utterance block is introduced by a "# <id>" comment line.
void write_alignment_tsv(std::ostream& out, const CorpusWerReport& report);

}  // namespace shiftdiv
