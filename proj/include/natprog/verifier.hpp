#pragma once

#include <string>
#include <vector>

#include "natprog/core.hpp"
#include "natprog/gateway.hpp"
#include "natprog/parser.hpp"
#include "natprog/prompts.hpp"

namespace natprog {

// Reads the reviewer's final attitude from free-form commentary: only the
// last sentence counts, "no" beats "yes" when both appear, and commentary
// with neither word approves the step.
Verdict extract_verdict(const std::string& completion);

// Strict majority of Valid wins; ties and empty ballots go to Invalid.
Verdict majority_verdict(const std::vector<Verdict>& votes);

enum class ContextMode { Minimal, Full };

struct VerifierOptions {
  ContextMode context_mode = ContextMode::Minimal;
  int shots = 1;        // worked exemplars in the step prompt: 0 or 1
  int k_prime = 3;      // votes collected per step
  double temperature = 0.7;
  int max_tokens = 512;
  bool short_circuit = false;  // stop at the first invalid step
  // Broken structure (dangling citations, failed validation) decides the
  // verdict by itself when true; otherwise verification runs on a lenient
  // reading and structure problems are only recorded.
  bool structural_failure_is_invalid = false;
  std::string model_name = "mock";
};

struct StepVerification {
  int step_label = 0;
  std::vector<Verdict> votes;  // ordered by sample index
  Verdict verdict = Verdict::Invalid;
  std::vector<std::string> completions;
  std::vector<int> dropped_citations;  // citations ignored under the lenient reading
};

struct ChainVerification {
  Verdict verdict = Verdict::Invalid;
  std::vector<StepVerification> steps;  // ascending label; truncated when short-circuited
  bool structural_failure = false;
  std::vector<std::string> completions;  // whole-chain judgments only
  std::vector<std::string> notes;
};

// Step-by-step deductive verification: each step is judged k' times against
// its own premise context, majority per step, chain valid iff every step is.
class Verifier {
 public:
  Verifier(Gateway& gateway, const PromptLibrary& prompts, VerifierOptions options);

  StepVerification verify_step(const ReasoningChain& chain, int step_label);

  // Validates structure itself, or trusts the report the caller already has.
  ChainVerification verify_chain(const ReasoningChain& chain);
  ChainVerification verify_chain(const ReasoningChain& chain, const StructureReport& report);

  // One holistic judgment over the unparsed chain text.
  ChainVerification verify_chain_baseline(const Question& q, const std::string& chain_text,
                                          ChainVerifyMode mode);

  const VerifierOptions& options() const { return options_; }

 private:
  Gateway& gateway_;
  const PromptLibrary& prompts_;
  VerifierOptions options_;
};

}  // namespace natprog
