#include <doctest.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "natprog/extraction.hpp"
#include "natprog/gateway.hpp"
#include "natprog/prompts.hpp"
#include "natprog/solver.hpp"

using namespace natprog;

namespace {

const char* kYes = "All quantities are grounded. So the answer is \"yes\".";
const char* kNo = "The step is ungrounded. So the answer is \"no\".";

const PromptLibrary& prompts() {
  static const PromptLibrary lib = PromptLibrary::load(NATPROG_ASSET_DIR);
  return lib;
}

const AnswerExtractor& extractor() {
  static const AnswerExtractor ex = AnswerExtractor::load(NATPROG_ASSET_DIR);
  return ex;
}

Question total_question() {
  Question q;
  q.id = "tot";
  q.question_text = "Add 3 and 1. What is the total?";
  q.gold_answer = "4";
  q.answer_type = AnswerType::Number;
  q.task_family = TaskFamily::MathWord;
  return q;
}

// A complete labeled chain whose final line answers with `total`. The probe
// word lands in the step body so verification prompts can be scripted per
// sampled chain.
std::string np_chain(int total, const std::string& probe) {
  return "First, let's write down all the statements and relationships in the "
         "question with labels.\n"
         "#1. The total is " + std::to_string(total) + ".\n"
         "#2. What is the total?\n"
         "Next, let's answer the question step by step with reference to the "
         "question and reasoning process:\n"
         "#3. (by #1 #2) Final Step " + probe + ": The answer is " +
         std::to_string(total) + ".\n";
}

// Scripted backend: one generation rule keyed on the question text, one
// verification rule per probe word.
std::shared_ptr<MockBackend> scripted(const std::vector<std::pair<int, bool>>& chains) {
  std::vector<MockRule> rules;
  std::vector<std::string> generations;
  for (size_t i = 0; i < chains.size(); ++i) {
    std::string probe = "probe" + std::to_string(i);
    generations.push_back(np_chain(chains[i].first, probe));
    rules.push_back({probe, false, {chains[i].second ? kYes : kNo}});
  }
  rules.push_back({"Add 3 and 1", false, std::move(generations)});
  return std::make_shared<MockBackend>(std::move(rules));
}

// Counts requests per tag prefix while delegating to the scripted mock.
class TagCounter : public CompletionBackend {
 public:
  explicit TagCounter(std::shared_ptr<CompletionBackend> inner) : inner_(std::move(inner)) {}
  std::vector<std::string> complete(const CompletionRequest& req,
                                    const std::vector<int>& sample_indices) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      requests_.push_back(req);
    }
    return inner_->complete(req, sample_indices);
  }
  CompletionSource source() const override { return inner_->source(); }
  const char* name() const override { return inner_->name(); }
  std::vector<CompletionRequest> requests() const {
    std::lock_guard<std::mutex> lock(mu_);
    return requests_;
  }

 private:
  std::shared_ptr<CompletionBackend> inner_;
  mutable std::mutex mu_;
  std::vector<CompletionRequest> requests_;
};

UPVConfig upv_config(int k) {
  UPVConfig config;
  config.k = k;
  config.k_prime = 3;
  return config;
}

VerifierOptions mock_options() {
  VerifierOptions options;
  options.model_name = "mock";
  return options;
}

}  // namespace

TEST_CASE("plurality pooling merges equivalent surface forms") {
  auto tallies = plurality_vote({{0, "4"}, {1, "4.0"}, {2, "7"}}, AnswerType::Number);
  REQUIRE(tallies.size() == 2);
  CHECK(tallies[0].representative == "4");
  CHECK(tallies[0].count == 2);
  CHECK(tallies[0].first_index == 0);
  CHECK(tallies[1].representative == "7");
  CHECK(tallies[1].count == 1);
  CHECK(tallies[1].first_index == 2);
}

TEST_CASE("plurality ties go to the class seen earliest") {
  auto tallies =
      plurality_vote({{0, "8"}, {1, "9"}, {2, "9"}, {3, "8"}}, AnswerType::Number);
  REQUIRE(tallies.size() == 2);
  CHECK(tallies[0].representative == "8");
  CHECK(tallies[0].count == 2);
  CHECK(tallies[1].representative == "9");

  // Input order does not matter; sample indices decide the representative.
  auto shuffled =
      plurality_vote({{3, "old"}, {0, "new"}}, AnswerType::FreeText);
  REQUIRE(shuffled.size() == 2);
  CHECK(shuffled[0].representative == "new");
  CHECK(shuffled[0].first_index == 0);

  CHECK(plurality_vote({}, AnswerType::Number).empty());
}

TEST_CASE("parallel loops cover every index exactly once") {
  for (int parallelism : {1, 3, 8, 64}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, parallelism, [&hits](int i) { hits[static_cast<size_t>(i)]++; });
    for (int i = 0; i < 100; ++i) CHECK(hits[static_cast<size_t>(i)].load() == 1);
  }
  parallel_for(0, 4, [](int) { FAIL("no work expected"); });
  parallel_for(-3, 4, [](int) { FAIL("no work expected"); });
}

TEST_CASE("parallel loops rethrow a worker failure after joining") {
  auto boom = [](int i) {
    if (i == 13) throw std::runtime_error("boom at 13");
  };
  CHECK_THROWS_WITH_AS(parallel_for(64, 8, boom), "boom at 13", std::runtime_error);
  CHECK_THROWS_WITH_AS(parallel_for(64, 1, boom), "boom at 13", std::runtime_error);
}

TEST_CASE("verified plurality picks the winner among fully valid chains") {
  // probe0/probe2/probe4 chains say 4, probe1 says 7; probe3 (9) and probe4
  // (4) fail verification.
  Gateway gateway(scripted({{4, true}, {7, true}, {4, true}, {9, false}, {4, false}}),
                  {std::nullopt, 8});
  Solver solver(gateway, prompts(), extractor(), upv_config(5), mock_options());

  SolveOutcome outcome = solver.solve(total_question());
  CHECK(outcome.method == SolveMethod::UPV);
  CHECK(outcome.question_ref == "tot");
  CHECK(!outcome.error.has_value());
  REQUIRE(outcome.final_answer.has_value());
  CHECK(*outcome.final_answer == "4");

  REQUIRE(outcome.vote.size() == 2);
  CHECK(outcome.vote[0].representative == "4");
  CHECK(outcome.vote[0].count == 2);
  CHECK(outcome.vote[0].first_index == 0);
  CHECK(outcome.vote[1].representative == "7");
  CHECK(outcome.vote[1].count == 1);

  REQUIRE(outcome.chains.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(outcome.chains[static_cast<size_t>(i)].sample_index == i);
    REQUIRE(outcome.chains[static_cast<size_t>(i)].verification.has_value());
    CHECK(outcome.chains[static_cast<size_t>(i)].parse_report.ok);
  }
  CHECK(outcome.chains[3].verification->verdict == Verdict::Invalid);
  CHECK(outcome.chains[4].verification->verdict == Verdict::Invalid);
  REQUIRE(outcome.chains[1].extraction.value.has_value());
  CHECK(*outcome.chains[1].extraction.value == "7");
}

TEST_CASE("verification can overturn the unverified majority") {
  // Three chains answer 9 but none survives verification; two answer 4.
  Gateway gateway(scripted({{4, true}, {9, false}, {9, false}, {9, false}, {4, true}}),
                  {std::nullopt, 8});
  Solver solver(gateway, prompts(), extractor(), upv_config(5), mock_options());

  SolveOutcome upv = solver.solve(total_question());
  REQUIRE(upv.final_answer.has_value());
  CHECK(*upv.final_answer == "4");
  REQUIRE(upv.vote.size() == 1);
  CHECK(upv.vote[0].count == 2);

  SolveOutcome majority = solver.simple_majority_solve(total_question());
  CHECK(majority.method == SolveMethod::SimpleMajority);
  REQUIRE(majority.final_answer.has_value());
  CHECK(*majority.final_answer == "9");
  REQUIRE(majority.vote.size() == 2);
  CHECK(majority.vote[0].count == 3);
  CHECK(majority.vote[1].count == 2);
  for (const auto& c : majority.chains) CHECK(!c.verification.has_value());
}

TEST_CASE("rejecting every chain leaves the question unanswered by default") {
  Gateway gateway(scripted({{4, false}, {7, false}, {9, false}}), {std::nullopt, 8});
  Solver solver(gateway, prompts(), extractor(), upv_config(3), mock_options());

  SolveOutcome outcome = solver.solve(total_question());
  CHECK(!outcome.final_answer.has_value());
  CHECK(outcome.vote.empty());
  CHECK(!outcome.error.has_value());
  REQUIRE(outcome.chains.size() == 3);
  for (const auto& c : outcome.chains) {
    REQUIRE(c.verification.has_value());
    CHECK(c.verification->verdict == Verdict::Invalid);
  }
}

TEST_CASE("the plurality fallback answers from unverified chains instead") {
  UPVConfig config = upv_config(3);
  config.fallback = Fallback::PluralityOverAll;
  Gateway gateway(scripted({{9, false}, {4, false}, {9, false}}), {std::nullopt, 8});
  Solver solver(gateway, prompts(), extractor(), config, mock_options());

  SolveOutcome outcome = solver.solve(total_question());
  REQUIRE(outcome.final_answer.has_value());
  CHECK(*outcome.final_answer == "9");
  REQUIRE(outcome.vote.size() == 2);
  CHECK(outcome.vote[0].count == 2);
}

TEST_CASE("chains that refuse to answer never enter a vote pool") {
  // probe0 answers 4 and verifies; probe1 refuses outright.
  std::vector<MockRule> rules = {
      {"probe0", false, {kYes}},
      {"probe1", false, {kYes}},
  };
  std::string refusal = np_chain(4, "probe1");
  refusal = refusal.substr(0, refusal.rfind("The answer is")) +
            "we cannot answer this question.\n";
  rules.push_back({"Add 3 and 1", false, {np_chain(4, "probe0"), refusal}});
  Gateway gateway(std::make_shared<MockBackend>(std::move(rules)), {std::nullopt, 8});
  Solver solver(gateway, prompts(), extractor(), upv_config(2), mock_options());

  SolveOutcome outcome = solver.solve(total_question());
  REQUIRE(outcome.final_answer.has_value());
  CHECK(*outcome.final_answer == "4");
  REQUIRE(outcome.vote.size() == 1);
  CHECK(outcome.vote[0].count == 1);
  CHECK(outcome.chains[1].extraction.is_no_answer());

  SolveOutcome majority = solver.simple_majority_solve(total_question());
  REQUIRE(majority.vote.size() == 1);
  CHECK(majority.vote[0].count == 1);
}

TEST_CASE("solver results do not depend on the verification schedule") {
  std::vector<std::pair<int, bool>> script = {
      {4, true}, {7, true}, {4, true}, {9, false}, {4, false},
      {7, false}, {4, true}, {9, true}, {4, false}, {7, true},
  };
  std::vector<SolveOutcome> outcomes;
  for (int parallelism : {1, 8}) {
    Gateway gateway(scripted(script), {std::nullopt, 8});
    Solver solver(gateway, prompts(), extractor(), upv_config(10), mock_options(), parallelism);
    outcomes.push_back(solver.solve(total_question()));
  }
  const SolveOutcome& a = outcomes[0];
  const SolveOutcome& b = outcomes[1];
  REQUIRE(a.final_answer.has_value());
  REQUIRE(b.final_answer.has_value());
  CHECK(*a.final_answer == *b.final_answer);
  REQUIRE(a.vote.size() == b.vote.size());
  for (size_t i = 0; i < a.vote.size(); ++i) {
    CHECK(a.vote[i].representative == b.vote[i].representative);
    CHECK(a.vote[i].count == b.vote[i].count);
    CHECK(a.vote[i].first_index == b.vote[i].first_index);
  }
  REQUIRE(a.chains.size() == b.chains.size());
  for (size_t i = 0; i < a.chains.size(); ++i)
    CHECK(a.chains[i].verification->verdict == b.chains[i].verification->verdict);
}

TEST_CASE("a backend failure is reported on the outcome, not thrown") {
  Gateway gateway(std::make_shared<MockBackend>(std::vector<MockRule>{}), {std::nullopt, 8});
  Solver solver(gateway, prompts(), extractor(), upv_config(2), mock_options());
  SolveOutcome outcome = solver.solve(total_question());
  REQUIRE(outcome.error.has_value());
  CHECK(outcome.error->find("no mock rule") != std::string::npos);
  CHECK(!outcome.final_answer.has_value());
  CHECK(outcome.chains.empty());
}

TEST_CASE("the voting scheme dictates sampling and vote-count knobs") {
  auto tap = std::make_shared<TagCounter>(scripted({{4, true}, {7, true}}));
  Gateway gateway(tap, {std::nullopt, 8});

  UPVConfig config = upv_config(2);
  config.k_prime = 1;
  config.temperature = 0.9;
  VerifierOptions options = mock_options();
  options.k_prime = 5;  // overridden by the voting scheme
  Solver solver(gateway, prompts(), extractor(), config, options);
  solver.solve(total_question());

  auto requests = tap->requests();
  REQUIRE(!requests.empty());
  int generation_requests = 0, verify_requests = 0;
  for (const auto& req : requests) {
    if (req.request_tag.rfind("gen:", 0) == 0) {
      ++generation_requests;
      CHECK(req.n == 2);
      CHECK(req.temperature == doctest::Approx(0.9));
    } else {
      REQUIRE(req.request_tag.rfind("verify:", 0) == 0);
      ++verify_requests;
      CHECK(req.n == 1);
      CHECK(req.temperature == doctest::Approx(0.7));
    }
  }
  CHECK(generation_requests == 1);
  CHECK(verify_requests == 2);
}

TEST_CASE("solver construction validates the vote parameters") {
  Gateway gateway(scripted({{4, true}}), {std::nullopt, 8});
  UPVConfig config = upv_config(1);
  config.k = 0;
  CHECK_THROWS_AS(Solver(gateway, prompts(), extractor(), config, mock_options()),
                  std::invalid_argument);
  config = upv_config(1);
  config.k_prime = 0;
  CHECK_THROWS_AS(Solver(gateway, prompts(), extractor(), config, mock_options()),
                  std::invalid_argument);
}
