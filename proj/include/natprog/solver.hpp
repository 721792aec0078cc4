#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "natprog/core.hpp"
#include "natprog/extraction.hpp"
#include "natprog/gateway.hpp"
#include "natprog/parser.hpp"
#include "natprog/prompts.hpp"
#include "natprog/verifier.hpp"

namespace natprog {

enum class SolveMethod { UPV, SimpleMajority };
const char* to_string(SolveMethod m);

struct ChainCandidate {
  int sample_index = 0;
  std::string raw_text;
  ReasoningChain chain;
  StructureReport parse_report;
  std::optional<ChainVerification> verification;  // unset under SimpleMajority
  ExtractionResult extraction;
};

struct AnswerTally {
  std::string representative;  // first-seen surface form of the class
  int count = 0;
  int first_index = 0;  // earliest sample index in the class
};

struct SolveOutcome {
  std::string question_ref;
  SolveMethod method = SolveMethod::UPV;
  std::vector<ChainCandidate> chains;       // ordered by sample index
  std::vector<AnswerTally> vote;            // the tallies the winner came from
  std::optional<std::string> final_answer;  // unset means no answer selected
  std::optional<std::string> error;
};

// Pools equivalent answers into classes and returns tallies ordered by
// descending count, ties broken by the class seen earliest.
std::vector<AnswerTally> plurality_vote(const std::vector<std::pair<int, std::string>>& answers,
                                        AnswerType type);

// Runs fn(0..n-1) on up to `parallelism` threads; rethrows one captured
// exception after joining. Results must be written to index-owned slots.
void parallel_for(int n, int parallelism, const std::function<void(int)>& fn);

// Samples k chains, verifies each step by step, and takes a plurality vote
// over the answers of chains whose every step passed.
class Solver {
 public:
  Solver(Gateway& gateway, const PromptLibrary& prompts, const AnswerExtractor& extractor,
         UPVConfig config, VerifierOptions verifier_options, int parallelism = 1);

  SolveOutcome solve(const Question& q);

  // Same k samples, no verification: plurality over every extracted answer.
  SolveOutcome simple_majority_solve(const Question& q);

  const UPVConfig& config() const { return config_; }

 private:
  std::vector<ChainCandidate> sample_chains(const Question& q);

  Gateway& gateway_;
  const PromptLibrary& prompts_;
  const AnswerExtractor& extractor_;
  UPVConfig config_;
  VerifierOptions verifier_options_;
  int parallelism_;
};

}  // namespace natprog
