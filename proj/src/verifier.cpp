#include "natprog/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace natprog {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Last non-empty sentence: segments end at . ! ? followed by whitespace or
// end of text, and a trailing unterminated fragment counts as a sentence.
std::string last_sentence(const std::string& text) {
  std::string last;
  size_t start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    bool at_end = i + 1 >= text.size();
    if (!at_end && std::isspace(static_cast<unsigned char>(text[i + 1])) == 0) continue;
    std::string seg = text.substr(start, i + 1 - start);
    if (!trim(seg).empty()) last = seg;
    start = i + 1;
  }
  std::string tail = text.substr(start);
  if (!trim(tail).empty()) last = tail;
  return last;
}

}  // namespace

Verdict extract_verdict(const std::string& completion) {
  std::string sentence = last_sentence(completion);
  if (sentence.empty()) return Verdict::Valid;

  static const std::regex attitude(R"(\b(yes|no)\b)", std::regex::icase);
  for (std::sregex_iterator it(sentence.begin(), sentence.end(), attitude), end; it != end; ++it) {
    char first = static_cast<char>(std::tolower(static_cast<unsigned char>((*it)[1].str()[0])));
    if (first == 'n') return Verdict::Invalid;  // any "no" rejects, whatever else is said
  }
  return Verdict::Valid;  // "yes" and silence both approve
}

Verdict majority_verdict(const std::vector<Verdict>& votes) {
  size_t valid = static_cast<size_t>(
      std::count(votes.begin(), votes.end(), Verdict::Valid));
  return 2 * valid > votes.size() ? Verdict::Valid : Verdict::Invalid;
}

Verifier::Verifier(Gateway& gateway, const PromptLibrary& prompts, VerifierOptions options)
    : gateway_(gateway), prompts_(prompts), options_(std::move(options)) {
  if (options_.k_prime < 1) throw std::invalid_argument("k_prime must be at least 1");
  if (options_.shots != 0 && options_.shots != 1)
    throw std::invalid_argument("step verification supports 0 or 1 exemplar shots");
}

StepVerification Verifier::verify_step(const ReasoningChain& chain, int step_label) {
  StepVerification result;
  result.step_label = step_label;

  PremiseContext ctx;
  if (options_.context_mode == ContextMode::Full) {
    ctx = full_context(chain, step_label);
  } else if (options_.structural_failure_is_invalid) {
    try {
      ctx = minimal_context(chain, step_label);
    } catch (const DanglingCitation&) {
      result.verdict = Verdict::Invalid;  // broken citation decides, no votes cast
      return result;
    }
  } else {
    ctx = minimal_context_lenient(chain, step_label);
    result.dropped_citations = ctx.dropped_citations;
  }

  CompletionRequest req;
  req.prompt = prompts_.step_verification_prompt(ctx, options_.shots);
  req.temperature = options_.temperature;
  req.n = options_.k_prime;
  req.max_tokens = options_.max_tokens;
  req.model_name = options_.model_name;
  req.request_tag = "verify:#" + std::to_string(step_label);

  CompletionBatch batch = gateway_.complete(req);
  result.completions = batch.completions;
  result.votes.reserve(batch.completions.size());
  for (const auto& c : batch.completions) result.votes.push_back(extract_verdict(c));
  result.verdict = majority_verdict(result.votes);
  return result;
}

ChainVerification Verifier::verify_chain(const ReasoningChain& chain) {
  return verify_chain(chain, validate_structure(chain));
}

ChainVerification Verifier::verify_chain(const ReasoningChain& chain,
                                         const StructureReport& report) {
  ChainVerification result;

  if (chain.steps.empty()) {
    result.verdict = Verdict::Invalid;
    result.structural_failure = true;
    result.notes.push_back("chain has no reasoning steps");
    return result;
  }

  result.structural_failure = !report.ok && options_.structural_failure_is_invalid;
  if (result.structural_failure && options_.short_circuit) {
    result.verdict = Verdict::Invalid;
    result.notes.push_back("structure failed validation; steps not voted on");
    return result;
  }

  std::vector<int> labels;
  labels.reserve(chain.steps.size());
  for (const auto& step : chain.steps) labels.push_back(step.label);
  std::sort(labels.begin(), labels.end());

  bool all_valid = true;
  for (int label : labels) {
    StepVerification sv = verify_step(chain, label);
    if (sv.verdict == Verdict::Invalid) all_valid = false;
    result.steps.push_back(std::move(sv));
    if (!all_valid && options_.short_circuit) break;
  }

  result.verdict =
      all_valid && !result.structural_failure ? Verdict::Valid : Verdict::Invalid;
  if (result.structural_failure)
    result.notes.push_back("structure failed validation");
  return result;
}

ChainVerification Verifier::verify_chain_baseline(const Question& q,
                                                  const std::string& chain_text,
                                                  ChainVerifyMode mode) {
  CompletionRequest req;
  req.prompt = prompts_.whole_chain_prompt(q, chain_text, mode);
  req.temperature = options_.temperature;
  req.n = 1;
  req.max_tokens = options_.max_tokens;
  req.model_name = options_.model_name;
  req.request_tag = "verify-chain:" + q.id;

  CompletionBatch batch = gateway_.complete(req);
  ChainVerification result;
  result.completions = batch.completions;
  result.verdict = extract_verdict(batch.completions.at(0));
  return result;
}

}  // namespace natprog
