#include "natprog/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace natprog {

namespace {

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.pop_back();
  return s;
}

std::string ltrim(std::string s) {
  size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool contains_final_tag(const std::string& body) {
  return lower(body).find("final step") != std::string::npos;
}

// The two fixed instruction sentences delimit the premise and step sections.
// They are never content, so they close the current item instead of being
// absorbed into its body.
bool is_section_instruction(const std::string& line) {
  std::string t = lower(ltrim(line));
  return t.rfind("first, let's write down all the statements", 0) == 0 ||
         t.rfind("next, let's answer the question step by step", 0) == 0;
}

// Leading "Step <n>:" markers are presentation, not content; contexts show
// the bare statement.
std::string strip_step_marker(const std::string& body) {
  static const std::regex marker(R"(^\s*step\s+\d+\s*:\s*)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(body, m, marker)) return body.substr(m[0].length());
  return body;
}

// "(by #a #b ...)" or "(by #a, #b)" right after the item number.
bool parse_by_clause(const std::string& rest, std::vector<int>* cited, size_t* consumed) {
  static const std::regex clause(R"(^\(\s*by((?:[\s,]*#\d+)+)[\s,]*\))", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(rest, m, clause)) return false;
  static const std::regex token(R"(#(\d+))");
  std::string inner = m[1].str();
  for (auto it = std::sregex_iterator(inner.begin(), inner.end(), token);
       it != std::sregex_iterator(); ++it)
    cited->push_back(std::stoi((*it)[1].str()));
  *consumed = m[0].length();
  return true;
}

struct RawItem {
  int label = 0;
  bool is_step = false;
  bool well_formed_by = false;
  std::vector<int> cited;
  std::string body;
};

void merge_issue(StructureReport* dst, const StructureIssue& issue) {
  for (const auto& have : dst->issues)
    if (have.code == issue.code && have.location == issue.location) return;
  dst->add(issue.code, issue.location, issue.message);
}

}  // namespace

const char* to_string(IssueCode c) {
  switch (c) {
    case IssueCode::MissingByClause: return "MissingByClause";
    case IssueCode::ForwardReference: return "ForwardReference";
    case IssueCode::NonContiguousLabels: return "NonContiguousLabels";
    case IssueCode::MissingFinalStep: return "MissingFinalStep";
    case IssueCode::DuplicateLabel: return "DuplicateLabel";
    case IssueCode::NoPremiseSection: return "NoPremiseSection";
    case IssueCode::EmptyStepBody: return "EmptyStepBody";
  }
  return "?";
}

void StructureReport::add(IssueCode code, int location, std::string message) {
  issues.push_back({code, location, std::move(message)});
  ok = false;
}

bool StructureReport::has(IssueCode code) const {
  for (const auto& i : issues)
    if (i.code == code) return true;
  return false;
}

DanglingCitation::DanglingCitation(int step, int cite)
    : std::runtime_error("step #" + std::to_string(step) +
                         " cites #" + std::to_string(cite) +
                         " which names no premise or prior step"),
      step_label(step),
      cited(cite) {}

ParseResult parse_chain(const std::string& raw, const Question& q) {
  ParseResult out;
  out.chain.question_ref = q.id;
  out.chain.raw_text = raw;

  static const std::regex item_open(R"(^\s*#(\d+)\.(.*)$)");

  std::vector<RawItem> items;
  bool steps_began = false;

  std::istringstream in(raw);
  std::string line;
  RawItem* current = nullptr;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, item_open)) {
      RawItem item;
      item.label = std::stoi(m[1].str());
      std::string rest = ltrim(m[2].str());
      size_t consumed = 0;
      if (parse_by_clause(rest, &item.cited, &consumed)) {
        item.is_step = true;
        item.well_formed_by = true;
        item.body = ltrim(rest.substr(consumed));
        steps_began = true;
      } else if (steps_began) {
        // Numbered item after the step section began: a step that forgot its
        // citations.
        item.is_step = true;
        item.body = rest;
      } else {
        item.body = rest;
      }
      items.push_back(std::move(item));
      current = &items.back();
    } else if (is_section_instruction(line)) {
      current = nullptr;
    } else if (current != nullptr) {
      current->body += "\n" + line;
    }
    // Text before the first numbered item (instruction echoes) is dropped.
  }

  if (items.empty()) {
    out.report.add(IssueCode::NoPremiseSection, 0, "no numbered items found");
    return out;
  }

  std::set<int> seen;
  for (auto& item : items) {
    item.body = rtrim(item.body);
    if (!seen.insert(item.label).second) {
      merge_issue(&out.report,
                  {IssueCode::DuplicateLabel, item.label,
                   "label #" + std::to_string(item.label) + " appears more than once; keeping the first"});
      continue;
    }
    if (item.is_step) {
      ReasoningStep step;
      step.label = item.label;
      step.cited_premises = item.cited;
      step.body = item.body;
      step.is_final = contains_final_tag(item.body);
      out.chain.steps.push_back(std::move(step));
    } else {
      out.chain.premises.push_back({item.label, item.body});
    }
  }

  StructureReport structural = validate_structure(out.chain);
  for (const auto& issue : structural.issues) merge_issue(&out.report, issue);
  for (auto& note : structural.notes) out.report.notes.push_back(std::move(note));
  return out;
}

StructureReport validate_structure(const ReasoningChain& chain) {
  StructureReport report;

  if (chain.premises.empty())
    report.add(IssueCode::NoPremiseSection, 0, "chain has no premise section");

  std::set<int> labels;
  for (const auto& p : chain.premises)
    if (!labels.insert(p.label).second)
      report.add(IssueCode::DuplicateLabel, p.label,
                 "label #" + std::to_string(p.label) + " appears more than once");
  for (const auto& s : chain.steps)
    if (!labels.insert(s.label).second)
      report.add(IssueCode::DuplicateLabel, s.label,
                 "label #" + std::to_string(s.label) + " appears more than once");

  int expected = 1;
  for (const auto& p : chain.premises) {
    if (p.label != expected) {
      report.add(IssueCode::NonContiguousLabels, p.label,
                 "expected premise #" + std::to_string(expected) + ", found #" +
                     std::to_string(p.label));
      expected = p.label;
    }
    ++expected;
  }
  const int premise_count = static_cast<int>(chain.premises.size());
  bool first_step = true;
  for (const auto& s : chain.steps) {
    if (s.label != expected) {
      std::string why =
          first_step ? "step numbering must start at #" + std::to_string(premise_count + 1)
                     : "expected step #" + std::to_string(expected);
      report.add(IssueCode::NonContiguousLabels, s.label,
                 why + ", found #" + std::to_string(s.label));
      expected = s.label;
    }
    first_step = false;
    ++expected;
  }

  for (const auto& s : chain.steps) {
    if (s.cited_premises.empty())
      report.add(IssueCode::MissingByClause, s.label,
                 "step #" + std::to_string(s.label) + " has no (by ...) clause");
    if (s.body.empty())
      report.add(IssueCode::EmptyStepBody, s.label,
                 "step #" + std::to_string(s.label) + " has an empty body");
    for (int c : s.cited_premises)
      if (c >= s.label) {
        report.add(IssueCode::ForwardReference, s.label,
                   "step #" + std::to_string(s.label) + " cites #" + std::to_string(c));
        break;
      }
  }

  // Exactly one final step, in last position, citing the restated question.
  std::vector<const ReasoningStep*> finals;
  for (const auto& s : chain.steps)
    if (s.is_final) finals.push_back(&s);
  if (finals.empty()) {
    report.add(IssueCode::MissingFinalStep, 0, "no step carries the Final Step tag");
  } else if (finals.size() > 1) {
    report.add(IssueCode::MissingFinalStep, finals[1]->label,
               "more than one step carries the Final Step tag");
  } else if (finals[0] != &chain.steps.back()) {
    report.add(IssueCode::MissingFinalStep, finals[0]->label,
               "the Final Step is not the last step");
  } else {
    auto question_labels = question_premise_labels(chain);
    if (question_labels.empty()) {
      report.notes.push_back(
          "no premise ends with '?'; skipping the final-step question-citation check");
    } else {
      bool cites_question = false;
      for (int c : finals[0]->cited_premises)
        if (std::find(question_labels.begin(), question_labels.end(), c) != question_labels.end())
          cites_question = true;
      if (!cites_question)
        report.add(IssueCode::MissingFinalStep, finals[0]->label,
                   "the Final Step does not cite the question premise");
    }
  }

  return report;
}

std::vector<int> question_premise_labels(const ReasoningChain& chain) {
  std::vector<int> out;
  for (const auto& p : chain.premises) {
    std::string t = rtrim(p.text);
    while (!t.empty() && (t.back() == '"' || t.back() == '\'')) t.pop_back();
    if (!t.empty() && t.back() == '?') out.push_back(p.label);
  }
  return out;
}

namespace {

PremiseContext build_cited_context(const ReasoningChain& chain, int step_label, bool lenient) {
  const ReasoningStep* step = nullptr;
  for (const auto& s : chain.steps)
    if (s.label == step_label) step = &s;
  if (step == nullptr)
    throw std::invalid_argument("#" + std::to_string(step_label) + " names no step");

  std::map<int, std::string> by_label;
  for (const auto& p : chain.premises) by_label.emplace(p.label, p.text);
  for (const auto& s : chain.steps)
    if (s.label < step_label) by_label.emplace(s.label, strip_step_marker(s.body));

  PremiseContext ctx;
  ctx.step_label = step_label;
  ctx.step_body = strip_step_marker(step->body);
  std::set<int> wanted(step->cited_premises.begin(), step->cited_premises.end());
  for (int label : wanted) {
    auto it = by_label.find(label);
    if (it == by_label.end()) {
      if (!lenient) throw DanglingCitation(step_label, label);
      ctx.dropped_citations.push_back(label);
      continue;
    }
    ctx.entries.emplace_back(label, it->second);
  }
  return ctx;
}

}  // namespace

PremiseContext minimal_context(const ReasoningChain& chain, int step_label) {
  return build_cited_context(chain, step_label, false);
}

PremiseContext minimal_context_lenient(const ReasoningChain& chain, int step_label) {
  return build_cited_context(chain, step_label, true);
}

PremiseContext full_context(const ReasoningChain& chain, int step_label) {
  const ReasoningStep* step = nullptr;
  for (const auto& s : chain.steps)
    if (s.label == step_label) step = &s;
  if (step == nullptr)
    throw std::invalid_argument("#" + std::to_string(step_label) + " names no step");

  std::map<int, std::string> by_label;
  for (const auto& p : chain.premises) by_label.emplace(p.label, p.text);
  for (const auto& s : chain.steps)
    if (s.label < step_label) by_label.emplace(s.label, strip_step_marker(s.body));

  PremiseContext ctx;
  ctx.step_label = step_label;
  ctx.step_body = strip_step_marker(step->body);
  for (const auto& [label, text] : by_label) ctx.entries.emplace_back(label, text);
  return ctx;
}

std::string render_chain(const ReasoningChain& chain) {
  std::string out;
  auto emit = [&out](const std::string& line) {
    if (!out.empty()) out += "\n";
    out += line;
  };
  for (const auto& p : chain.premises)
    emit("#" + std::to_string(p.label) + "." + (p.text.empty() ? "" : " " + p.text));
  for (const auto& s : chain.steps) {
    std::string line = "#" + std::to_string(s.label) + ".";
    if (!s.cited_premises.empty()) {
      line += " (by";
      for (int c : s.cited_premises) line += " #" + std::to_string(c);
      line += ")";
    }
    if (!s.body.empty()) line += " " + s.body;
    emit(line);
  }
  return out;
}

}  // namespace natprog
