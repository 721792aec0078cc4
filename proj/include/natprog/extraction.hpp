#pragma once

#include <optional>
#include <string>
#include <vector>

#include "natprog/core.hpp"

namespace natprog {

// value is empty exactly when the response carries no usable answer.
// matched_pattern names what fired ("no-answer:<pat>", "split:<pat>",
// "type:<regex>", "freetext:line-remainder", "choice:<regex>", or "none").
// source_block is the text the type-level scan ran over.
struct ExtractionResult {
  std::optional<std::string> value;
  std::string matched_pattern;
  std::string source_block;
  bool is_no_answer() const { return !value.has_value(); }
};

// Pipeline, in fixed order over the last three non-empty lines:
// no-answer patterns, then answer-split (keep the last block), then the
// per-type pattern with first match winning.
class AnswerExtractor {
 public:
  AnswerExtractor(std::vector<std::string> no_answer_patterns,
                  std::vector<std::string> answer_split_patterns);

  // Reads patterns/no_answer.txt and patterns/answer_split.txt under dir.
  static AnswerExtractor load(const std::string& asset_dir);

  ExtractionResult extract_final_answer(const std::string& response, AnswerType type) const;

  const std::vector<std::string>& no_answer_patterns() const { return no_answer_; }
  const std::vector<std::string>& answer_split_patterns() const { return split_; }

 private:
  std::vector<std::string> no_answer_;
  std::vector<std::string> split_;
};

// Per-type extraction pattern. Number/Fraction/Date/YesNo are the pinned
// regexes; MultipleChoice uses the plumbing pattern ([A-E])\); FreeText has
// no regex (line-remainder rule) and returns "".
std::string answer_type_regex(AnswerType type);

// Equivalence for scoring and vote pooling. Numeric types compare as exact
// rationals where parseable (tolerance 1e-6 otherwise); dates compare as
// exact strings; YesNo/FreeText case-insensitively; choices by option letter.
bool answers_equal(const std::string& a, const std::string& b, AnswerType type);

// Canonical pooling key consistent with answers_equal.
std::string normalize_answer(const std::string& a, AnswerType type);

// Last `count` non-empty lines of text, joined with '\n'.
std::string last_nonempty_lines(const std::string& text, int count);

// "# comment" lines and blank lines skipped; other lines kept verbatim
// (trailing spaces included).
std::vector<std::string> load_pattern_file(const std::string& path);

}  // namespace natprog
