#include "natprog/solver.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace natprog {

const char* to_string(SolveMethod m) {
  return m == SolveMethod::UPV ? "UPV" : "SimpleMajority";
}

std::vector<AnswerTally> plurality_vote(const std::vector<std::pair<int, std::string>>& answers,
                                        AnswerType type) {
  std::vector<std::pair<int, std::string>> ordered = answers;
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<AnswerTally> tallies;
  for (const auto& [index, value] : ordered) {
    bool pooled = false;
    for (auto& tally : tallies)
      if (answers_equal(tally.representative, value, type)) {
        ++tally.count;
        pooled = true;
        break;
      }
    if (!pooled) tallies.push_back({value, 1, index});
  }
  std::stable_sort(tallies.begin(), tallies.end(), [](const AnswerTally& a, const AnswerTally& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_index < b.first_index;
  });
  return tallies;
}

void parallel_for(int n, int parallelism, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  parallelism = std::clamp(parallelism, 1, n);
  if (parallelism == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);  // stop handing out work
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(parallelism));
  for (int t = 0; t < parallelism; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

Solver::Solver(Gateway& gateway, const PromptLibrary& prompts, const AnswerExtractor& extractor,
               UPVConfig config, VerifierOptions verifier_options, int parallelism)
    : gateway_(gateway),
      prompts_(prompts),
      extractor_(extractor),
      config_(config),
      verifier_options_(std::move(verifier_options)),
      parallelism_(parallelism) {
  if (config_.k < 1) throw std::invalid_argument("k must be at least 1");
  if (config_.k_prime < 1) throw std::invalid_argument("k_prime must be at least 1");
  // The vote count and the structure policy belong to the voting scheme.
  verifier_options_.k_prime = config_.k_prime;
  verifier_options_.structural_failure_is_invalid = config_.structural_failure_is_invalid;
}

std::vector<ChainCandidate> Solver::sample_chains(const Question& q) {
  CompletionRequest req;
  req.prompt = prompts_.generation_prompt(q);
  req.temperature = config_.temperature;
  req.n = config_.k;
  req.max_tokens = 1024;
  req.model_name = verifier_options_.model_name;
  req.request_tag = "gen:" + q.id;

  CompletionBatch batch = gateway_.complete(req);
  std::vector<ChainCandidate> candidates;
  candidates.reserve(batch.completions.size());
  for (int i = 0; i < static_cast<int>(batch.completions.size()); ++i) {
    ChainCandidate c;
    c.sample_index = i;
    c.raw_text = batch.completions[i];
    ParseResult parsed = parse_chain(c.raw_text, q);
    c.chain = std::move(parsed.chain);
    c.parse_report = std::move(parsed.report);
    c.extraction = extractor_.extract_final_answer(c.raw_text, q.answer_type);
    candidates.push_back(std::move(c));
  }
  return candidates;
}

SolveOutcome Solver::solve(const Question& q) {
  SolveOutcome outcome;
  outcome.question_ref = q.id;
  outcome.method = SolveMethod::UPV;
  try {
    outcome.chains = sample_chains(q);

    Verifier verifier(gateway_, prompts_, verifier_options_);
    int n = static_cast<int>(outcome.chains.size());
    parallel_for(n, parallelism_, [&](int i) {
      ChainCandidate& c = outcome.chains[static_cast<size_t>(i)];
      c.verification = verifier.verify_chain(c.chain, c.parse_report);
    });

    std::vector<std::pair<int, std::string>> accepted;
    for (const ChainCandidate& c : outcome.chains)
      if (c.verification->verdict == Verdict::Valid && !c.extraction.is_no_answer())
        accepted.emplace_back(c.sample_index, *c.extraction.value);

    outcome.vote = plurality_vote(accepted, q.answer_type);
    if (!outcome.vote.empty()) {
      outcome.final_answer = outcome.vote.front().representative;
    } else if (config_.fallback == Fallback::PluralityOverAll) {
      std::vector<std::pair<int, std::string>> everyone;
      for (const ChainCandidate& c : outcome.chains)
        if (!c.extraction.is_no_answer())
          everyone.emplace_back(c.sample_index, *c.extraction.value);
      outcome.vote = plurality_vote(everyone, q.answer_type);
      if (!outcome.vote.empty()) outcome.final_answer = outcome.vote.front().representative;
    }
  } catch (const GatewayError& e) {
    outcome.error = e.what();
  }
  return outcome;
}

SolveOutcome Solver::simple_majority_solve(const Question& q) {
  SolveOutcome outcome;
  outcome.question_ref = q.id;
  outcome.method = SolveMethod::SimpleMajority;
  try {
    outcome.chains = sample_chains(q);
    std::vector<std::pair<int, std::string>> everyone;
    for (const ChainCandidate& c : outcome.chains)
      if (!c.extraction.is_no_answer())
        everyone.emplace_back(c.sample_index, *c.extraction.value);
    outcome.vote = plurality_vote(everyone, q.answer_type);
    if (!outcome.vote.empty()) outcome.final_answer = outcome.vote.front().representative;
  } catch (const GatewayError& e) {
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace natprog
