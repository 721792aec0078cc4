#include "natprog/prompts.hpp"

#include <json.hpp>

#include <stdexcept>

#include "natprog/digest.hpp"

namespace natprog {

namespace {

struct AssetSpec {
  const char* id;
  const char* file;
  int shots;
};

// Registry of prompt assets; shots is part of the template's contract.
constexpr AssetSpec kAssets[] = {
    {"gen_math_word", "gen_math_word.txt", 1},
    {"gen_math_word_mc", "gen_math_word_mc.txt", 1},
    {"gen_date", "gen_date.txt", 2},
    {"gen_last_letters", "gen_last_letters.txt", 1},
    {"verify_step_oneshot", "verify_step_oneshot.txt", 1},
    {"verify_step_zeroshot", "verify_step_zeroshot.txt", 0},
    {"whole_chain_zeroshot", "whole_chain_zeroshot.txt", 0},
    {"whole_chain_twoshot", "whole_chain_twoshot.txt", 2},
};

const char* generation_template_id(TaskFamily f) {
  switch (f) {
    case TaskFamily::MathWord: return "gen_math_word";
    case TaskFamily::MathWordMC: return "gen_math_word_mc";
    case TaskFamily::DateUnderstanding: return "gen_date";
    case TaskFamily::LastLetters: return "gen_last_letters";
  }
  throw std::invalid_argument("unknown task family");
}

}  // namespace

std::string render_template(const std::string& body,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(body.size());
  size_t pos = 0;
  while (pos < body.size()) {
    size_t open = body.find('{', pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    size_t close = body.find('}', open);
    bool replaced = false;
    if (close != std::string::npos) {
      std::string key = body.substr(open + 1, close - open - 1);
      auto it = values.find(key);
      if (it != values.end()) {
        out.append(body, pos, open - pos);
        out += it->second;
        pos = close + 1;
        replaced = true;
      }
    }
    if (!replaced) {
      out.append(body, pos, open - pos + 1);
      pos = open + 1;
    }
  }
  return out;
}

PromptLibrary PromptLibrary::load(const std::string& asset_dir) {
  const std::string dir = asset_dir + "/prompts";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("prompt manifest unreadable: " + std::string(e.what()));
  }

  PromptLibrary lib;
  for (const AssetSpec& spec : kAssets) {
    std::string body = read_file(dir + "/" + spec.file);
    std::string digest = sha256_hex(body);
    if (!manifest.contains(spec.file))
      throw std::runtime_error(std::string("prompt asset missing from manifest: ") + spec.file);
    std::string pinned = manifest.at(spec.file).get<std::string>();
    if (pinned != digest)
      throw std::runtime_error(std::string("prompt asset drifted from pinned digest: ") +
                               spec.file + " (have " + digest + ", want " + pinned + ")");
    lib.templates_[spec.id] = {spec.id, spec.shots, std::move(body)};
    lib.digests_[spec.file] = std::move(digest);
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw std::invalid_argument("unknown prompt template: " + id);
  return it->second;
}

std::string PromptLibrary::render_choices(const std::vector<Choice>& choices) {
  std::string out;
  for (const auto& c : choices) {
    if (!out.empty()) out += "\n";
    out += c.label + ") " + c.text;
  }
  return out;
}

std::string PromptLibrary::render_question_block(const Question& q) {
  if (q.context_text.has_value() && !q.context_text->empty())
    return *q.context_text + "\n" + q.question_text;
  return q.question_text;
}

std::string PromptLibrary::render_context_entries(const PremiseContext& ctx) {
  std::string out;
  int n = 0;
  for (const auto& [label, text] : ctx.entries) {
    (void)label;  // local numbering only; global labels stay out of the prompt
    if (!out.empty()) out += "\n";
    out += std::to_string(++n) + ". " + text;
  }
  return out;
}

std::string PromptLibrary::generation_prompt(const Question& q) const {
  const PromptTemplate& tpl = get(generation_template_id(q.task_family));
  std::map<std::string, std::string> values{{"QUESTION", render_question_block(q)}};
  if (q.task_family == TaskFamily::MathWordMC) {
    if (!q.choices.has_value() || q.choices->empty())
      throw std::invalid_argument("multiple-choice question without choices: " + q.id);
    values["CHOICES"] = render_choices(*q.choices);
  }
  return render_template(tpl.body, values);
}

std::string PromptLibrary::step_verification_prompt(const PremiseContext& ctx, int shots) const {
  if (shots != 0 && shots != 1)
    throw std::invalid_argument("step verification supports 0 or 1 shots");
  const PromptTemplate& tpl = get(shots == 1 ? "verify_step_oneshot" : "verify_step_zeroshot");
  return render_template(tpl.body, {{"PREMISE_CONTEXT", render_context_entries(ctx)},
                                    {"STEP_BODY", ctx.step_body}});
}

std::string PromptLibrary::whole_chain_prompt(const Question& q, const std::string& chain_text,
                                              ChainVerifyMode mode) const {
  const PromptTemplate& tpl =
      get(mode == ChainVerifyMode::ZeroShot ? "whole_chain_zeroshot" : "whole_chain_twoshot");
  return render_template(tpl.body, {{"QUESTION", render_question_block(q)},
                                    {"CHAIN_TEXT", chain_text}});
}

}  // namespace natprog
