#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "natprog/core.hpp"

namespace natprog {

enum class IssueCode {
  MissingByClause,
  ForwardReference,
  NonContiguousLabels,
  MissingFinalStep,
  DuplicateLabel,
  NoPremiseSection,
  EmptyStepBody,
};

const char* to_string(IssueCode c);

struct StructureIssue {
  IssueCode code;
  int location = 0;  // label of the offending item, 0 when chain-wide
  std::string message;
  bool operator==(const StructureIssue&) const = default;
};

// ok is true exactly when issues is empty. notes carry non-fatal remarks
// (e.g. "no question premise identifiable") and never affect ok.
struct StructureReport {
  bool ok = true;
  std::vector<StructureIssue> issues;
  std::vector<std::string> notes;

  void add(IssueCode code, int location, std::string message);
  bool has(IssueCode code) const;
};

// Everything a verifier needs to judge one step in isolation: the cited
// statements (ascending by label, duplicates collapsed) and the step text.
struct PremiseContext {
  int step_label = 0;
  std::vector<std::pair<int, std::string>> entries;
  std::string step_body;
  std::vector<int> dropped_citations;  // unresolvable labels skipped in lenient mode
};

struct ParseResult {
  ReasoningChain chain;
  StructureReport report;
};

class DanglingCitation : public std::runtime_error {
 public:
  DanglingCitation(int step_label, int cited);
  int step_label;
  int cited;
};

// Best-effort parse of a model response in the labeled-statement format.
// Violations are reported, not thrown; the only irrecoverable input is one
// with no numbered items at all (NoPremiseSection, empty chain).
ParseResult parse_chain(const std::string& raw, const Question& q);

// Structural checks computable from the chain object alone: contiguous
// labels, no forward references, exactly one tagged final step in last
// position citing the question premise, by-clauses present, non-empty bodies.
StructureReport validate_structure(const ReasoningChain& chain);

// Context from exactly the step's citations / from everything before the
// step. Throws std::invalid_argument when step_label names no step, and
// DanglingCitation when a citation resolves to nothing (minimal only).
PremiseContext minimal_context(const ReasoningChain& chain, int step_label);
PremiseContext full_context(const ReasoningChain& chain, int step_label);

// Like minimal_context but drops unresolvable citations (recorded in
// dropped_citations) instead of throwing.
PremiseContext minimal_context_lenient(const ReasoningChain& chain, int step_label);

// Canonical text form: one "#N. text" line per premise, "#N. (by #a #b) body"
// per step, items joined by single newlines. parse_chain(render_chain(c)) is
// structurally equal to c for structurally valid chains.
std::string render_chain(const ReasoningChain& chain);

// Labels of premises whose text ends with '?' (the restated question).
std::vector<int> question_premise_labels(const ReasoningChain& chain);

}  // namespace natprog
