#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "natprog/core.hpp"
#include "natprog/extraction.hpp"
#include "natprog/gateway.hpp"
#include "natprog/prompts.hpp"
#include "natprog/solver.hpp"
#include "natprog/verifier.hpp"

namespace natprog {

// --- dataset ingestion -------------------------------------------------------

enum class DatasetFormat { AnswerEval, VerificationEval };

struct DatasetRecord {
  Question question;
  std::string chain_text;           // VerificationEval only
  bool ground_truth_valid = false;  // VerificationEval only
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<std::string> issues;  // "path:line: message"
  int skipped = 0;
};

// Line-delimited JSON, one record per line:
//   {"id", "question", "context"?, "choices"?, "gold_answer"?,
//    "answer_type", "task_family", "chain_text"?, "ground_truth_valid"?}
// Malformed lines are reported and skipped; strict mode throws instead.
// gold_answer splits on "####" (tail wins), records without an id get
// "path:line". Missing gold on an answer-eval record is kept and left to the
// evaluation to skip.
LoadResult load_dataset(const std::string& path, DatasetFormat format, bool strict = false);

// --- verification benchmark --------------------------------------------------

enum class VerificationEvalMode { NaturalProgram, WholeChainZeroShot, WholeChainTwoShot };
const char* to_string(VerificationEvalMode m);

struct VerificationEvalConfig {
  VerificationEvalMode mode = VerificationEvalMode::NaturalProgram;
  VerifierOptions verifier;
  int parallelism = 1;
  std::string dataset_name = "dataset";
};

struct VerificationRow {
  std::string dataset;
  int valid_total = 0;
  int valid_judged_valid = 0;
  int invalid_total = 0;
  int invalid_judged_invalid = 0;
  double correct_class_accuracy = 0.0;  // valid chains judged Valid
  double wrong_class_accuracy = 0.0;    // invalid chains judged Invalid
  double average = 0.0;                 // mean of the two class accuracies
};

struct VerificationReport {
  std::string mode;
  int shots = 0;
  int k_prime = 0;
  std::vector<VerificationRow> rows;  // one per dataset
  VerificationRow overall;            // pooled counts across datasets
};

// Judges every labeled chain and scores the two classes separately.
VerificationRow run_verification_eval(const std::vector<DatasetRecord>& records,
                                      const VerificationEvalConfig& cfg, Gateway& gateway,
                                      const PromptLibrary& prompts);

VerificationReport make_verification_report(const VerificationEvalConfig& cfg,
                                            std::vector<VerificationRow> rows);

// --- answer benchmark ----------------------------------------------------------

struct AnswerEvalConfig {
  UPVConfig upv;
  VerifierOptions verifier;
  bool run_upv = true;
  bool run_majority = true;
  int parallelism = 1;        // across questions
  int chain_parallelism = 1;  // within one question's verification
  std::string dataset_name = "dataset";
};

struct MethodAccuracy {
  std::string method;
  int total = 0;    // records scored (gold present)
  int correct = 0;
  int unknown = 0;  // no answer selected; scored incorrect
  double accuracy = 0.0;
};

struct AnswerEvalRow {
  std::string dataset;
  int skipped = 0;  // records without gold
  std::vector<MethodAccuracy> methods;
};

struct AnswerEvalResult {
  AnswerEvalRow row;
  std::vector<SolveOutcome> upv_outcomes;       // record order, skipped records included
  std::vector<SolveOutcome> majority_outcomes;
};

struct AccuracyReport {
  int k = 0;
  int k_prime = 0;
  std::vector<AnswerEvalRow> rows;
  AnswerEvalRow overall;  // pooled counts across datasets
  std::string transcripts_path;
};

AnswerEvalResult run_answer_eval(const std::vector<DatasetRecord>& records,
                                 const AnswerEvalConfig& cfg, Gateway& gateway,
                                 const PromptLibrary& prompts, const AnswerExtractor& extractor);

AccuracyReport make_accuracy_report(const AnswerEvalConfig& cfg, std::vector<AnswerEvalRow> rows,
                                    std::string transcripts_path = "");

// --- vote-count ablation -------------------------------------------------------

struct KPrimeRow {
  int k_prime = 0;
  double stability = 0.0;  // measured fraction of majority verdicts matching truth
  double exact = 0.0;      // closed-form binomial majority probability
};

struct KPrimeReport {
  double flip_probability = 0.0;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<KPrimeRow> rows;
};

// P[majority verdict over k' votes equals truth] when each vote independently
// flips the truth with probability flip_p; ties count as Invalid.
double exact_majority_match_probability(int k_prime, double flip_p, Verdict truth);

// Measures verify_step majority stability on `trials` synthetic one-step
// chains against a seeded vote-flipping backend, next to the exact value.
KPrimeReport run_kprime_ablation(const std::vector<int>& k_values, double flip_probability,
                                 std::uint64_t seed, int trials, const PromptLibrary& prompts);

// --- report emission ----------------------------------------------------------

enum class ReportFormat { JSON, Markdown, CSV };

std::string render_markdown(const VerificationReport& r);
std::string render_markdown(const AccuracyReport& r);
std::string render_markdown(const KPrimeReport& r);
std::string render_csv(const VerificationReport& r);
std::string render_csv(const AccuracyReport& r);
std::string render_csv(const KPrimeReport& r);
std::string render_json(const VerificationReport& r);
std::string render_json(const AccuracyReport& r);
std::string render_json(const KPrimeReport& r);

template <typename Report>
std::string render_report(const Report& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::JSON: return render_json(r);
    case ReportFormat::Markdown: return render_markdown(r);
    case ReportFormat::CSV: return render_csv(r);
  }
  return "";
}

// Atomic write; emits exactly the rendered bytes (byte-stable given equal inputs).
template <typename Report>
void emit_report(const Report& r, ReportFormat format, const std::string& path);

// --- run manifest ---------------------------------------------------------------

struct RunInfo {
  std::string command;
  std::string backend;
  std::string model_name;
  UPVConfig config;
  std::map<std::string, std::string> prompt_digests;
  std::uint64_t seed = 0;
  std::string dataset_path;
};

// Reproducibility record written next to reports. Contains no timestamps,
// so identical runs produce identical manifests.
std::string render_run_manifest(const RunInfo& info);

// JSON transcript of solve outcomes, one entry per question in record order.
std::string render_transcripts(const std::vector<SolveOutcome>& outcomes);

}  // namespace natprog
