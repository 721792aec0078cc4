#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace natprog {

enum class AnswerType { Number, Fraction, Date, YesNo, FreeText, MultipleChoice };
enum class TaskFamily { MathWord, MathWordMC, DateUnderstanding, LastLetters };

const char* to_string(AnswerType t);
const char* to_string(TaskFamily f);
std::optional<AnswerType> answer_type_from_string(std::string_view s);
std::optional<TaskFamily> task_family_from_string(std::string_view s);

struct Choice {
  std::string label;  // "A", "B", ...
  std::string text;
  bool operator==(const Choice&) const = default;
};

// One benchmark item. choices must be present exactly when answer_type is
// MultipleChoice; validate_question reports violations.
struct Question {
  std::string id;
  std::string question_text;
  std::optional<std::string> context_text;
  std::optional<std::vector<Choice>> choices;
  std::optional<std::string> gold_answer;
  AnswerType answer_type = AnswerType::Number;
  TaskFamily task_family = TaskFamily::MathWord;
};

std::optional<std::string> validate_question(const Question& q);

// Labeled statement from the question/context section. Labels run 1..|QC|.
struct Premise {
  int label = 0;
  std::string text;
  bool operator==(const Premise&) const = default;
};

// One deduction. label continues the premise numbering; cited_premises are the
// labels in the step's "(by ...)" clause, in written order.
struct ReasoningStep {
  int label = 0;
  std::vector<int> cited_premises;
  std::string body;
  bool is_final = false;
  bool operator==(const ReasoningStep&) const = default;
};

struct ReasoningChain {
  std::string question_ref;
  std::vector<Premise> premises;
  std::vector<ReasoningStep> steps;
  std::string raw_text;  // original model output, never reformatted
};

// Structural equality ignoring raw_text (render/parse round trips keep
// everything else).
bool structurally_equal(const ReasoningChain& a, const ReasoningChain& b);

enum class Verdict { Valid, Invalid };
const char* to_string(Verdict v);

enum class Fallback { Unknown, PluralityOverAll };

struct UPVConfig {
  int k = 10;              // reasoning chains sampled per question
  int k_prime = 3;         // validity votes per step
  double temperature = 0.7;
  bool structural_failure_is_invalid = false;
  Fallback fallback = Fallback::Unknown;
};

// A chain is only as good as its weakest step: logical AND over step verdicts.
// Throws std::invalid_argument("no steps") on an empty list.
Verdict chain_validity(const std::vector<Verdict>& step_verdicts);

}  // namespace natprog
