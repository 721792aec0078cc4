#include "natprog/core.hpp"

#include <stdexcept>

namespace natprog {

const char* to_string(AnswerType t) {
  switch (t) {
    case AnswerType::Number: return "Number";
    case AnswerType::Fraction: return "Fraction";
    case AnswerType::Date: return "Date";
    case AnswerType::YesNo: return "YesNo";
    case AnswerType::FreeText: return "FreeText";
    case AnswerType::MultipleChoice: return "MultipleChoice";
  }
  return "?";
}

const char* to_string(TaskFamily f) {
  switch (f) {
    case TaskFamily::MathWord: return "MathWord";
    case TaskFamily::MathWordMC: return "MathWordMC";
    case TaskFamily::DateUnderstanding: return "DateUnderstanding";
    case TaskFamily::LastLetters: return "LastLetters";
  }
  return "?";
}

std::optional<AnswerType> answer_type_from_string(std::string_view s) {
  if (s == "Number") return AnswerType::Number;
  if (s == "Fraction") return AnswerType::Fraction;
  if (s == "Date") return AnswerType::Date;
  if (s == "YesNo") return AnswerType::YesNo;
  if (s == "FreeText") return AnswerType::FreeText;
  if (s == "MultipleChoice") return AnswerType::MultipleChoice;
  return std::nullopt;
}

std::optional<TaskFamily> task_family_from_string(std::string_view s) {
  if (s == "MathWord") return TaskFamily::MathWord;
  if (s == "MathWordMC") return TaskFamily::MathWordMC;
  if (s == "DateUnderstanding") return TaskFamily::DateUnderstanding;
  if (s == "LastLetters") return TaskFamily::LastLetters;
  return std::nullopt;
}

std::optional<std::string> validate_question(const Question& q) {
  bool mc = q.answer_type == AnswerType::MultipleChoice;
  bool has_choices = q.choices.has_value() && !q.choices->empty();
  if (mc && !has_choices)
    return "answer_type MultipleChoice requires a non-empty choices list";
  if (!mc && q.choices.has_value())
    return "choices are only allowed when answer_type is MultipleChoice";
  if (q.question_text.empty()) return "question_text is empty";
  return std::nullopt;
}

bool structurally_equal(const ReasoningChain& a, const ReasoningChain& b) {
  return a.question_ref == b.question_ref && a.premises == b.premises &&
         a.steps == b.steps;
}

const char* to_string(Verdict v) {
  return v == Verdict::Valid ? "Valid" : "Invalid";
}

Verdict chain_validity(const std::vector<Verdict>& step_verdicts) {
  if (step_verdicts.empty()) throw std::invalid_argument("no steps");
  for (Verdict v : step_verdicts)
    if (v == Verdict::Invalid) return Verdict::Invalid;
  return Verdict::Valid;
}

}  // namespace natprog
