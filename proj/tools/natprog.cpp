#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "natprog/bench.hpp"
#include "natprog/digest.hpp"
#include "natprog/extraction.hpp"
#include "natprog/gateway.hpp"
#include "natprog/prompts.hpp"
#include "natprog/solver.hpp"
#include "natprog/verifier.hpp"

#ifndef NATPROG_ASSET_DIR
#define NATPROG_ASSET_DIR "assets"
#endif

namespace {

using namespace natprog;

struct BackendFlags {
  std::string backend = "mock";
  std::string script;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "mock";
  std::string cache_dir;
  double flip_probability = 0.2;
  std::uint64_t seed = 42;
  int max_in_flight = 8;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
  cmd->add_option("--backend", f.backend, "Completion backend")
      ->check(CLI::IsMember({"mock", "stochastic-mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--mock-script", f.script, "JSON rule script for the mock backends");
  cmd->add_option("--endpoint", f.endpoint, "Chat-completions endpoint URL")
      ->capture_default_str();
  cmd->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  cmd->add_option("--model", f.model, "Model name sent with each request")->capture_default_str();
  cmd->add_option("--cache-dir", f.cache_dir, "Directory for the per-sample response cache");
  cmd->add_option("--flip-probability", f.flip_probability,
                  "Stochastic mock: probability a vote flips")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Stochastic mock seed")->capture_default_str();
  cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent backend request cap")
      ->capture_default_str();
}

std::shared_ptr<CompletionBackend> build_backend(const BackendFlags& f) {
  if (f.backend == "mock") {
    std::vector<MockRule> rules;
    std::optional<std::string> default_response;
    if (!f.script.empty()) {
      nlohmann::json j = nlohmann::json::parse(read_file(f.script));
      if (j.contains("default_response"))
        default_response = j["default_response"].get<std::string>();
      for (const auto& r : j.value("rules", nlohmann::json::array())) {
        MockRule rule;
        if (r.contains("fingerprint")) {
          rule.match = r["fingerprint"].get<std::string>();
          rule.match_is_fingerprint = true;
        } else {
          rule.match = r.at("match").get<std::string>();
        }
        for (const auto& resp : r.at("responses")) rule.responses.push_back(resp.get<std::string>());
        rules.push_back(std::move(rule));
      }
    }
    return std::make_shared<MockBackend>(std::move(rules), std::move(default_response));
  }
  if (f.backend == "stochastic-mock") {
    std::vector<StochasticRule> rules;
    double flip = f.flip_probability;
    std::uint64_t seed = f.seed;
    if (!f.script.empty()) {
      nlohmann::json j = nlohmann::json::parse(read_file(f.script));
      flip = j.value("flip_probability", flip);
      seed = j.value("seed", seed);
      for (const auto& r : j.value("rules", nlohmann::json::array()))
        rules.push_back({r.at("match").get<std::string>(),
                         r.at("truth").get<std::string>() == "valid" ? Verdict::Valid
                                                                     : Verdict::Invalid});
    }
    return std::make_shared<StochasticMockBackend>(std::move(rules), flip, seed);
  }
  const char* key = std::getenv(f.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw ConfigError("live backend needs a credential in $" + f.api_key_env);
  HttpBackendConfig cfg;
  cfg.endpoint_url = f.endpoint;
  cfg.api_key = key;
  return std::make_shared<HttpBackend>(cfg);
}

Gateway build_gateway(const BackendFlags& f) {
  GatewayConfig cfg;
  if (!f.cache_dir.empty()) cfg.cache_dir = f.cache_dir;
  cfg.max_in_flight = f.max_in_flight;
  return Gateway(build_backend(f), cfg);
}

ReportFormat parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::JSON;
  if (s == "csv") return ReportFormat::CSV;
  return ReportFormat::Markdown;
}

const char* format_extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::JSON: return "json";
    case ReportFormat::CSV: return "csv";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

void write_outputs(const std::string& out_dir, const std::string& report_text,
                   ReportFormat format, const RunInfo& info,
                   const std::optional<std::string>& transcripts) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path base(out_dir);
  write_file_atomic((base / (std::string("report.") + format_extension(format))).string(),
                    report_text);
  write_file_atomic((base / "manifest.json").string(), render_run_manifest(info));
  if (transcripts.has_value())
    write_file_atomic((base / "transcripts.json").string(), *transcripts);
}

void print_dataset_issues(const LoadResult& loaded) {
  for (const auto& issue : loaded.issues) std::cerr << "warning: " << issue << "\n";
}

// --- solve -----------------------------------------------------------------

struct SolveFlags {
  BackendFlags backend;
  std::string dataset;
  std::string question;
  std::string context;
  std::string gold;
  std::vector<std::string> choices;
  std::string answer_type = "Number";
  std::string task_family = "MathWord";
  int k = 10;
  int k_prime = 3;
  double temperature = 0.7;
  double verify_temperature = -1.0;  // <0 follows --temperature
  std::string method = "upv";
  std::string context_mode = "minimal";
  std::string fallback = "unknown";
  int shots = 1;
  bool structural_invalid = false;
  int parallelism = 1;
  int question_parallelism = 1;
  bool strict = false;
  std::string asset_dir = NATPROG_ASSET_DIR;
  std::string out_dir;
  std::string format = "markdown";
};

UPVConfig make_upv_config(const SolveFlags& f) {
  UPVConfig cfg;
  cfg.k = f.k;
  cfg.k_prime = f.k_prime;
  cfg.temperature = f.temperature;
  cfg.structural_failure_is_invalid = f.structural_invalid;
  cfg.fallback = f.fallback == "plurality" ? Fallback::PluralityOverAll : Fallback::Unknown;
  return cfg;
}

VerifierOptions make_verifier_options(const SolveFlags& f) {
  VerifierOptions opts;
  opts.context_mode = f.context_mode == "full" ? ContextMode::Full : ContextMode::Minimal;
  opts.shots = f.shots;
  opts.k_prime = f.k_prime;
  opts.temperature = f.verify_temperature >= 0.0 ? f.verify_temperature : f.temperature;
  opts.structural_failure_is_invalid = f.structural_invalid;
  opts.model_name = f.backend.model;
  return opts;
}

RunInfo make_run_info(const std::string& command, const SolveFlags& f,
                      const PromptLibrary& prompts) {
  RunInfo info;
  info.command = command;
  info.backend = f.backend.backend;
  info.model_name = f.backend.model;
  info.config = make_upv_config(f);
  info.prompt_digests = prompts.digests();
  info.seed = f.backend.seed;
  info.dataset_path = f.dataset;
  return info;
}

int run_solve_single(const SolveFlags& f, Gateway& gateway, const PromptLibrary& prompts,
                     const AnswerExtractor& extractor) {
  Question q;
  q.id = "cli";
  q.question_text = f.question;
  if (!f.context.empty()) q.context_text = f.context;
  if (!f.gold.empty()) q.gold_answer = f.gold;
  auto at = answer_type_from_string(f.answer_type);
  auto tf = task_family_from_string(f.task_family);
  if (!at || !tf) throw ConfigError("unknown answer type or task family");
  q.answer_type = *at;
  q.task_family = *tf;
  if (!f.choices.empty()) {
    std::vector<Choice> choices;
    for (const auto& s : f.choices) {
      size_t paren = s.find(')');
      if (paren == std::string::npos || paren == 0)
        throw ConfigError("choice must look like \"A) text\": " + s);
      Choice c;
      c.label = s.substr(0, paren);
      c.text = s.substr(paren + 1);
      while (!c.text.empty() && c.text.front() == ' ') c.text.erase(c.text.begin());
      choices.push_back(std::move(c));
    }
    q.choices = std::move(choices);
  }
  if (auto problem = validate_question(q); problem.has_value()) throw ConfigError(*problem);

  Solver solver(gateway, prompts, extractor, make_upv_config(f), make_verifier_options(f),
                f.parallelism);
  SolveOutcome outcome =
      f.method == "majority" ? solver.simple_majority_solve(q) : solver.solve(q);

  if (outcome.error.has_value()) {
    std::cerr << "error: " << *outcome.error << "\n";
    return 1;
  }

  std::cout << "Method: " << to_string(outcome.method) << "\n";
  std::cout << "Final answer: " << (outcome.final_answer ? *outcome.final_answer : "Unknown")
            << "\n";
  std::cout << "Vote:";
  if (outcome.vote.empty()) std::cout << " (no surviving answers)";
  for (const auto& t : outcome.vote) std::cout << " [" << t.representative << " x" << t.count << "]";
  std::cout << "\n";
  int verified = 0;
  for (const auto& c : outcome.chains)
    if (c.verification.has_value() && c.verification->verdict == Verdict::Valid) ++verified;
  std::cout << "Chains: " << outcome.chains.size() << " sampled";
  if (f.method != "majority") std::cout << ", " << verified << " fully verified";
  std::cout << "\n";
  if (q.gold_answer.has_value()) {
    bool correct = outcome.final_answer.has_value() &&
                   answers_equal(*outcome.final_answer, *q.gold_answer, q.answer_type);
    std::cout << "Gold: " << *q.gold_answer << " -> " << (correct ? "correct" : "incorrect")
              << "\n";
  }

  if (!f.out_dir.empty()) {
    RunInfo info = make_run_info("solve", f, prompts);
    std::filesystem::create_directories(f.out_dir);
    write_file_atomic((std::filesystem::path(f.out_dir) / "manifest.json").string(),
                      render_run_manifest(info));
    write_file_atomic((std::filesystem::path(f.out_dir) / "transcripts.json").string(),
                      render_transcripts({outcome}));
  }
  return 0;
}

int run_solve(const SolveFlags& f) {
  PromptLibrary prompts = PromptLibrary::load(f.asset_dir);
  AnswerExtractor extractor = AnswerExtractor::load(f.asset_dir);
  Gateway gateway = build_gateway(f.backend);

  if (f.dataset.empty()) return run_solve_single(f, gateway, prompts, extractor);

  LoadResult loaded = load_dataset(f.dataset, DatasetFormat::AnswerEval, f.strict);
  print_dataset_issues(loaded);

  AnswerEvalConfig cfg;
  cfg.upv = make_upv_config(f);
  cfg.verifier = make_verifier_options(f);
  cfg.run_upv = f.method == "upv" || f.method == "both";
  cfg.run_majority = f.method == "majority" || f.method == "both";
  cfg.parallelism = f.question_parallelism;
  cfg.chain_parallelism = f.parallelism;
  cfg.dataset_name = std::filesystem::path(f.dataset).stem().string();

  AnswerEvalResult result = run_answer_eval(loaded.records, cfg, gateway, prompts, extractor);

  std::string transcripts_path;
  if (!f.out_dir.empty()) transcripts_path = "transcripts.json";
  AccuracyReport report = make_accuracy_report(cfg, {result.row}, transcripts_path);
  ReportFormat format = parse_format(f.format);
  std::string text = render_report(report, format);
  std::cout << text;

  std::vector<SolveOutcome> all;
  for (const auto& o : result.majority_outcomes) all.push_back(o);
  for (const auto& o : result.upv_outcomes) all.push_back(o);
  if (!f.out_dir.empty())
    write_outputs(f.out_dir, text, format, make_run_info("solve", f, prompts),
                  render_transcripts(all));

  int errored = 0;
  for (const auto& o : all)
    if (o.error.has_value()) ++errored;
  if (errored > 0) {
    std::cerr << "error: " << errored << " question(s) failed at the backend\n";
    return 1;
  }
  return 0;
}

// --- verify ------------------------------------------------------------------

struct VerifyFlags {
  BackendFlags backend;
  std::string dataset;
  std::string mode = "natural-program";
  std::string context_mode = "minimal";
  int shots = 1;
  int k_prime = 3;
  double temperature = 0.7;
  bool structural_invalid = false;
  int parallelism = 1;
  bool strict = false;
  std::string asset_dir = NATPROG_ASSET_DIR;
  std::string out_dir;
  std::string format = "markdown";
};

int run_verify(const VerifyFlags& f) {
  PromptLibrary prompts = PromptLibrary::load(f.asset_dir);
  Gateway gateway = build_gateway(f.backend);

  LoadResult loaded = load_dataset(f.dataset, DatasetFormat::VerificationEval, f.strict);
  print_dataset_issues(loaded);

  VerificationEvalConfig cfg;
  if (f.mode == "whole-chain-zeroshot")
    cfg.mode = VerificationEvalMode::WholeChainZeroShot;
  else if (f.mode == "whole-chain-twoshot")
    cfg.mode = VerificationEvalMode::WholeChainTwoShot;
  else
    cfg.mode = VerificationEvalMode::NaturalProgram;
  cfg.verifier.context_mode = f.context_mode == "full" ? ContextMode::Full : ContextMode::Minimal;
  cfg.verifier.shots = f.shots;
  cfg.verifier.k_prime = f.k_prime;
  cfg.verifier.temperature = f.temperature;
  cfg.verifier.structural_failure_is_invalid = f.structural_invalid;
  cfg.verifier.model_name = f.backend.model;
  cfg.parallelism = f.parallelism;
  cfg.dataset_name = std::filesystem::path(f.dataset).stem().string();

  VerificationRow row = run_verification_eval(loaded.records, cfg, gateway, prompts);
  VerificationReport report = make_verification_report(cfg, {row});
  ReportFormat format = parse_format(f.format);
  std::string text = render_report(report, format);
  std::cout << text;

  if (!f.out_dir.empty()) {
    RunInfo info;
    info.command = "verify";
    info.backend = f.backend.backend;
    info.model_name = f.backend.model;
    info.config.k_prime = f.k_prime;
    info.config.temperature = f.temperature;
    info.config.structural_failure_is_invalid = f.structural_invalid;
    info.prompt_digests = prompts.digests();
    info.seed = f.backend.seed;
    info.dataset_path = f.dataset;
    write_outputs(f.out_dir, text, format, info, std::nullopt);
  }
  return 0;
}

// --- ablate-kprime --------------------------------------------------------------

struct AblateFlags {
  std::vector<int> values = {1, 3, 5};
  double flip_probability = 0.2;
  std::uint64_t seed = 42;
  int trials = 1000;
  std::string asset_dir = NATPROG_ASSET_DIR;
  std::string out_dir;
  std::string format = "markdown";
};

int run_ablate(const AblateFlags& f) {
  PromptLibrary prompts = PromptLibrary::load(f.asset_dir);
  KPrimeReport report =
      run_kprime_ablation(f.values, f.flip_probability, f.seed, f.trials, prompts);
  ReportFormat format = parse_format(f.format);
  std::string text = render_report(report, format);
  std::cout << text;

  if (!f.out_dir.empty()) {
    RunInfo info;
    info.command = "ablate-kprime";
    info.backend = "stochastic-mock";
    info.model_name = "stochastic-mock";
    info.prompt_digests = prompts.digests();
    info.seed = f.seed;
    write_outputs(f.out_dir, text, format, info, std::nullopt);
  }
  return 0;
}

// --- report (re-render a cached JSON run) -------------------------------------

VerificationReport verification_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.mode = j.value("mode", "");
  r.shots = j.value("shots", 0);
  r.k_prime = j.value("k_prime", 0);
  auto row_from = [](const nlohmann::json& v) {
    VerificationRow row;
    row.dataset = v.value("dataset", "");
    row.valid_total = v.value("valid_total", 0);
    row.valid_judged_valid = v.value("valid_judged_valid", 0);
    row.invalid_total = v.value("invalid_total", 0);
    row.invalid_judged_invalid = v.value("invalid_judged_invalid", 0);
    row.correct_class_accuracy = v.value("correct_class_accuracy", 0.0);
    row.wrong_class_accuracy = v.value("wrong_class_accuracy", 0.0);
    row.average = v.value("average", 0.0);
    return row;
  };
  for (const auto& v : j.value("datasets", nlohmann::json::array())) r.rows.push_back(row_from(v));
  if (j.contains("overall")) r.overall = row_from(j["overall"]);
  return r;
}

AccuracyReport accuracy_from_json(const nlohmann::json& j) {
  AccuracyReport r;
  r.k = j.value("k", 0);
  r.k_prime = j.value("k_prime", 0);
  auto row_from = [](const nlohmann::json& v) {
    AnswerEvalRow row;
    row.dataset = v.value("dataset", "");
    row.skipped = v.value("skipped", 0);
    for (const auto& m : v.value("methods", nlohmann::json::array())) {
      MethodAccuracy acc;
      acc.method = m.value("method", "");
      acc.total = m.value("total", 0);
      acc.correct = m.value("correct", 0);
      acc.unknown = m.value("unknown", 0);
      acc.accuracy = m.value("accuracy", 0.0);
      row.methods.push_back(std::move(acc));
    }
    return row;
  };
  for (const auto& v : j.value("datasets", nlohmann::json::array())) r.rows.push_back(row_from(v));
  if (j.contains("overall")) r.overall = row_from(j["overall"]);
  r.transcripts_path = j.value("transcripts", "");
  return r;
}

KPrimeReport kprime_from_json(const nlohmann::json& j) {
  KPrimeReport r;
  r.flip_probability = j.value("flip_probability", 0.0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.trials = j.value("trials", 0);
  for (const auto& v : j.value("rows", nlohmann::json::array())) {
    KPrimeRow row;
    row.k_prime = v.value("k_prime", 0);
    row.stability = v.value("stability", 0.0);
    row.exact = v.value("exact", 0.0);
    r.rows.push_back(row);
  }
  return r;
}

int run_report(const std::string& in_path, const std::string& format_name,
               const std::string& out_path) {
  nlohmann::json j = nlohmann::json::parse(read_file(in_path));
  std::string kind = j.value("report", "");
  ReportFormat format = parse_format(format_name);
  std::string text;
  if (kind == "verification")
    text = render_report(verification_from_json(j), format);
  else if (kind == "answer_accuracy")
    text = render_report(accuracy_from_json(j), format);
  else if (kind == "kprime_ablation")
    text = render_report(kprime_from_json(j), format);
  else
    throw ConfigError("unrecognized report kind in " + in_path);
  if (out_path.empty())
    std::cout << text;
  else
    write_file_atomic(out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-program reasoning chains: generation, step verification, voting"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "Sample chains and vote on a final answer");
  add_backend_flags(solve, solve_flags.backend);
  solve->add_option("--dataset", solve_flags.dataset, "JSONL answer-eval dataset");
  solve->add_option("--question", solve_flags.question, "Single question text");
  solve->add_option("--context", solve_flags.context, "Context paragraph for the question");
  solve->add_option("--gold", solve_flags.gold, "Gold answer for scoring");
  solve->add_option("--choice", solve_flags.choices, "Answer choice \"A) text\" (repeatable)");
  solve->add_option("--answer-type", solve_flags.answer_type,
                    "Number|Fraction|Date|YesNo|FreeText|MultipleChoice")
      ->capture_default_str();
  solve->add_option("--task-family", solve_flags.task_family,
                    "MathWord|MathWordMC|DateUnderstanding|LastLetters")
      ->capture_default_str();
  solve->add_option("--k", solve_flags.k, "Chains sampled per question")->capture_default_str();
  solve->add_option("--k-prime", solve_flags.k_prime, "Votes per step")->capture_default_str();
  solve->add_option("--temperature", solve_flags.temperature, "Sampling temperature")
      ->capture_default_str();
  solve->add_option("--verify-temperature", solve_flags.verify_temperature,
                    "Verification temperature (defaults to --temperature)");
  solve->add_option("--method", solve_flags.method, "Voting method")
      ->check(CLI::IsMember({"upv", "majority", "both"}))
      ->capture_default_str();
  solve->add_option("--context-mode", solve_flags.context_mode, "Premises shown when verifying")
      ->check(CLI::IsMember({"minimal", "full"}))
      ->capture_default_str();
  solve->add_option("--fallback", solve_flags.fallback, "When no chain survives")
      ->check(CLI::IsMember({"unknown", "plurality"}))
      ->capture_default_str();
  solve->add_option("--shots", solve_flags.shots, "Exemplars in step verification prompts (0|1)")
      ->capture_default_str();
  solve->add_flag("--structural-invalid", solve_flags.structural_invalid,
                  "Broken chain structure counts as an invalid chain");
  solve->add_option("--parallelism", solve_flags.parallelism, "Threads per question")
      ->capture_default_str();
  solve->add_option("--question-parallelism", solve_flags.question_parallelism,
                    "Questions processed concurrently")
      ->capture_default_str();
  solve->add_flag("--strict", solve_flags.strict, "Abort on malformed dataset lines");
  solve->add_option("--asset-dir", solve_flags.asset_dir, "Prompt/pattern asset directory")
      ->capture_default_str();
  solve->add_option("--out", solve_flags.out_dir, "Directory for report, manifest, transcripts");
  solve->add_option("--format", solve_flags.format, "Report format")
      ->check(CLI::IsMember({"markdown", "json", "csv"}))
      ->capture_default_str();

  VerifyFlags verify_flags;
  CLI::App* verify = app.add_subcommand("verify", "Judge labeled chains and score both classes");
  add_backend_flags(verify, verify_flags.backend);
  verify->add_option("--dataset", verify_flags.dataset, "JSONL verification-eval dataset")
      ->required();
  verify->add_option("--mode", verify_flags.mode, "Verification strategy")
      ->check(CLI::IsMember({"natural-program", "whole-chain-zeroshot", "whole-chain-twoshot"}))
      ->capture_default_str();
  verify->add_option("--context-mode", verify_flags.context_mode, "Premises shown per step")
      ->check(CLI::IsMember({"minimal", "full"}))
      ->capture_default_str();
  verify->add_option("--shots", verify_flags.shots, "Exemplars in step prompts (0|1)")
      ->capture_default_str();
  verify->add_option("--k-prime", verify_flags.k_prime, "Votes per step")->capture_default_str();
  verify->add_option("--temperature", verify_flags.temperature, "Verification temperature")
      ->capture_default_str();
  verify->add_flag("--structural-invalid", verify_flags.structural_invalid,
                   "Broken chain structure counts as an invalid chain");
  verify->add_option("--parallelism", verify_flags.parallelism, "Chains judged concurrently")
      ->capture_default_str();
  verify->add_flag("--strict", verify_flags.strict, "Abort on malformed dataset lines");
  verify->add_option("--asset-dir", verify_flags.asset_dir, "Prompt/pattern asset directory")
      ->capture_default_str();
  verify->add_option("--out", verify_flags.out_dir, "Directory for report and manifest");
  verify->add_option("--format", verify_flags.format, "Report format")
      ->check(CLI::IsMember({"markdown", "json", "csv"}))
      ->capture_default_str();

  AblateFlags ablate_flags;
  CLI::App* ablate =
      app.add_subcommand("ablate-kprime", "Sweep votes-per-step against the exact majority odds");
  ablate->add_option("--values", ablate_flags.values, "Vote counts to sweep")
      ->delimiter(',')
      ->capture_default_str();
  ablate->add_option("--flip-probability", ablate_flags.flip_probability,
                     "Per-vote flip probability")
      ->capture_default_str();
  ablate->add_option("--seed", ablate_flags.seed, "Vote-flip seed")->capture_default_str();
  ablate->add_option("--trials", ablate_flags.trials, "Synthetic steps per sweep point")
      ->capture_default_str();
  ablate->add_option("--asset-dir", ablate_flags.asset_dir, "Prompt/pattern asset directory")
      ->capture_default_str();
  ablate->add_option("--out", ablate_flags.out_dir, "Directory for report and manifest");
  ablate->add_option("--format", ablate_flags.format, "Report format")
      ->check(CLI::IsMember({"markdown", "json", "csv"}))
      ->capture_default_str();

  std::string report_in;
  std::string report_format = "markdown";
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "Re-render a cached JSON report");
  report->add_option("--in", report_in, "JSON report produced by an earlier run")->required();
  report->add_option("--format", report_format, "Target format")
      ->check(CLI::IsMember({"markdown", "json", "csv"}))
      ->capture_default_str();
  report->add_option("--out", report_out, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(solve_flags);
    if (verify->parsed()) return run_verify(verify_flags);
    if (ablate->parsed()) return run_ablate(ablate_flags);
    if (report->parsed()) return run_report(report_in, report_format, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const GatewayError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
