#pragma once

#include <map>
#include <string>

#include "natprog/core.hpp"
#include "natprog/parser.hpp"

namespace natprog {

// One prompt text asset. body may contain {QUESTION}, {CHOICES},
// {PREMISE_CONTEXT}, {STEP_BODY}, {CHAIN_TEXT} placeholders.
struct PromptTemplate {
  std::string id;
  int shots = 0;
  std::string body;
};

enum class ChainVerifyMode { ZeroShot, TwoShot };

// Loads the prompt assets from <asset_dir>/prompts and refuses to run on
// drifted files: every asset's SHA-256 must match prompts/manifest.json.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::string& asset_dir);

  // Exemplar(s) for the question's task family followed by the question
  // rendered the same way. MathWordMC requires choices.
  std::string generation_prompt(const Question& q) const;

  // Information block (entries renumbered 1..n in ascending-label order) and
  // the bare step text, preceded by the worked exemplar when shots == 1.
  std::string step_verification_prompt(const PremiseContext& ctx, int shots = 1) const;

  // Whole-chain judgment prompt over the unparsed chain text.
  std::string whole_chain_prompt(const Question& q, const std::string& chain_text,
                                 ChainVerifyMode mode) const;

  const PromptTemplate& get(const std::string& id) const;
  const std::map<std::string, std::string>& digests() const { return digests_; }

  static std::string render_choices(const std::vector<Choice>& choices);
  static std::string render_question_block(const Question& q);
  static std::string render_context_entries(const PremiseContext& ctx);

 private:
  std::map<std::string, PromptTemplate> templates_;
  std::map<std::string, std::string> digests_;
};

// Placeholder substitution in one pass; substituted values are not rescanned.
std::string render_template(const std::string& body,
                            const std::map<std::string, std::string>& values);

}  // namespace natprog
