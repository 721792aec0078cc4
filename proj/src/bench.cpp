#include "natprog/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "natprog/digest.hpp"
#include "natprog/parser.hpp"

namespace natprog {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// "#### 25" style gold: everything after the last marker, trimmed.
std::string split_gold(const std::string& raw) {
  size_t pos = raw.rfind("####");
  if (pos == std::string::npos) return trim(raw);
  return trim(raw.substr(pos + 4));
}

std::optional<std::vector<Choice>> parse_choices(const nlohmann::json& j, std::string& error) {
  if (!j.is_array()) {
    error = "choices must be an array";
    return std::nullopt;
  }
  std::vector<Choice> choices;
  for (const auto& item : j) {
    Choice c;
    if (item.is_string()) {
      // "A) 4" convention used by option-list datasets
      std::string s = item.get<std::string>();
      size_t paren = s.find(')');
      if (paren == std::string::npos || paren == 0) {
        error = "string choice must look like \"A) text\"";
        return std::nullopt;
      }
      c.label = trim(s.substr(0, paren));
      c.text = trim(s.substr(paren + 1));
    } else if (item.is_object() && item.contains("label") && item.contains("text") &&
               item["label"].is_string() && item["text"].is_string()) {
      c.label = item["label"].get<std::string>();
      c.text = item["text"].get<std::string>();
    } else {
      error = "choice must be a \"A) text\" string or a {label, text} object";
      return std::nullopt;
    }
    choices.push_back(std::move(c));
  }
  return choices;
}

}  // namespace

const char* to_string(VerificationEvalMode m) {
  switch (m) {
    case VerificationEvalMode::NaturalProgram: return "NaturalProgram";
    case VerificationEvalMode::WholeChainZeroShot: return "WholeChainZeroShot";
    case VerificationEvalMode::WholeChainTwoShot: return "WholeChainTwoShot";
  }
  return "?";
}

// --- dataset ingestion -------------------------------------------------------

LoadResult load_dataset(const std::string& path, DatasetFormat format, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  LoadResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;

    std::string where = path + ":" + std::to_string(line_no);
    auto fail = [&](const std::string& message) {
      std::string issue = where + ": " + message;
      if (strict) throw std::runtime_error(issue);
      result.issues.push_back(issue);
      ++result.skipped;
    };

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("not valid JSON (") + e.what() + ")");
      continue;
    }
    if (!j.is_object()) {
      fail("record must be a JSON object");
      continue;
    }

    DatasetRecord rec;
    Question& q = rec.question;
    q.id = j.contains("id") && j["id"].is_string() && !j["id"].get<std::string>().empty()
               ? j["id"].get<std::string>()
               : where;

    if (!j.contains("question") || !j["question"].is_string() ||
        trim(j["question"].get<std::string>()).empty()) {
      fail("missing required field: question");
      continue;
    }
    q.question_text = j["question"].get<std::string>();

    if (j.contains("context")) {
      if (!j["context"].is_string()) {
        fail("context must be a string");
        continue;
      }
      q.context_text = j["context"].get<std::string>();
    }

    if (!j.contains("answer_type") || !j["answer_type"].is_string()) {
      fail("missing required field: answer_type");
      continue;
    }
    auto at = answer_type_from_string(j["answer_type"].get<std::string>());
    if (!at.has_value()) {
      fail("unknown answer_type: " + j["answer_type"].get<std::string>());
      continue;
    }
    q.answer_type = *at;

    if (!j.contains("task_family") || !j["task_family"].is_string()) {
      fail("missing required field: task_family");
      continue;
    }
    auto tf = task_family_from_string(j["task_family"].get<std::string>());
    if (!tf.has_value()) {
      fail("unknown task_family: " + j["task_family"].get<std::string>());
      continue;
    }
    q.task_family = *tf;

    if (j.contains("choices")) {
      std::string error;
      q.choices = parse_choices(j["choices"], error);
      if (!q.choices.has_value()) {
        fail(error);
        continue;
      }
    }

    if (j.contains("gold_answer")) {
      const auto& g = j["gold_answer"];
      if (g.is_string())
        q.gold_answer = split_gold(g.get<std::string>());
      else if (g.is_number())
        q.gold_answer = g.dump();
      else {
        fail("gold_answer must be a string or number");
        continue;
      }
    }

    if (auto problem = validate_question(q); problem.has_value()) {
      fail(*problem);
      continue;
    }

    if (format == DatasetFormat::VerificationEval) {
      if (!j.contains("chain_text") || !j["chain_text"].is_string()) {
        fail("verification record needs chain_text");
        continue;
      }
      if (!j.contains("ground_truth_valid") || !j["ground_truth_valid"].is_boolean()) {
        fail("verification record needs ground_truth_valid");
        continue;
      }
      rec.chain_text = j["chain_text"].get<std::string>();
      rec.ground_truth_valid = j["ground_truth_valid"].get<bool>();
    }

    result.records.push_back(std::move(rec));
  }

  if (line_no == 0)
    result.issues.push_back(path + ": dataset file is empty");
  return result;
}

// --- verification benchmark --------------------------------------------------

VerificationRow run_verification_eval(const std::vector<DatasetRecord>& records,
                                      const VerificationEvalConfig& cfg, Gateway& gateway,
                                      const PromptLibrary& prompts) {
  Verifier verifier(gateway, prompts, cfg.verifier);
  std::vector<char> judged_valid(records.size(), 0);

  parallel_for(static_cast<int>(records.size()), cfg.parallelism, [&](int i) {
    const DatasetRecord& rec = records[static_cast<size_t>(i)];
    Verdict v;
    if (cfg.mode == VerificationEvalMode::NaturalProgram) {
      ParseResult parsed = parse_chain(rec.chain_text, rec.question);
      v = verifier.verify_chain(parsed.chain, parsed.report).verdict;
    } else {
      ChainVerifyMode m = cfg.mode == VerificationEvalMode::WholeChainZeroShot
                              ? ChainVerifyMode::ZeroShot
                              : ChainVerifyMode::TwoShot;
      v = verifier.verify_chain_baseline(rec.question, rec.chain_text, m).verdict;
    }
    judged_valid[static_cast<size_t>(i)] = v == Verdict::Valid ? 1 : 0;
  });

  VerificationRow row;
  row.dataset = cfg.dataset_name;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].ground_truth_valid) {
      ++row.valid_total;
      if (judged_valid[i] != 0) ++row.valid_judged_valid;
    } else {
      ++row.invalid_total;
      if (judged_valid[i] == 0) ++row.invalid_judged_invalid;
    }
  }
  row.correct_class_accuracy =
      row.valid_total > 0 ? static_cast<double>(row.valid_judged_valid) / row.valid_total : 0.0;
  row.wrong_class_accuracy =
      row.invalid_total > 0 ? static_cast<double>(row.invalid_judged_invalid) / row.invalid_total
                            : 0.0;
  row.average = (row.correct_class_accuracy + row.wrong_class_accuracy) / 2.0;
  return row;
}

VerificationReport make_verification_report(const VerificationEvalConfig& cfg,
                                            std::vector<VerificationRow> rows) {
  VerificationReport report;
  report.mode = to_string(cfg.mode);
  report.shots = cfg.verifier.shots;
  report.k_prime = cfg.verifier.k_prime;
  report.rows = std::move(rows);

  VerificationRow& overall = report.overall;
  overall.dataset = "Overall";
  for (const VerificationRow& r : report.rows) {
    overall.valid_total += r.valid_total;
    overall.valid_judged_valid += r.valid_judged_valid;
    overall.invalid_total += r.invalid_total;
    overall.invalid_judged_invalid += r.invalid_judged_invalid;
  }
  overall.correct_class_accuracy =
      overall.valid_total > 0
          ? static_cast<double>(overall.valid_judged_valid) / overall.valid_total
          : 0.0;
  overall.wrong_class_accuracy =
      overall.invalid_total > 0
          ? static_cast<double>(overall.invalid_judged_invalid) / overall.invalid_total
          : 0.0;
  overall.average = (overall.correct_class_accuracy + overall.wrong_class_accuracy) / 2.0;
  return report;
}

// --- answer benchmark ----------------------------------------------------------

AnswerEvalResult run_answer_eval(const std::vector<DatasetRecord>& records,
                                 const AnswerEvalConfig& cfg, Gateway& gateway,
                                 const PromptLibrary& prompts, const AnswerExtractor& extractor) {
  AnswerEvalResult result;
  result.row.dataset = cfg.dataset_name;

  Solver solver(gateway, prompts, extractor, cfg.upv, cfg.verifier, cfg.chain_parallelism);
  size_t n = records.size();
  if (cfg.run_upv) result.upv_outcomes.resize(n);
  if (cfg.run_majority) result.majority_outcomes.resize(n);

  parallel_for(static_cast<int>(n), cfg.parallelism, [&](int i) {
    const Question& q = records[static_cast<size_t>(i)].question;
    if (cfg.run_majority)
      result.majority_outcomes[static_cast<size_t>(i)] = solver.simple_majority_solve(q);
    if (cfg.run_upv) result.upv_outcomes[static_cast<size_t>(i)] = solver.solve(q);
  });

  MethodAccuracy majority{"SimpleMajority", 0, 0, 0, 0.0};
  MethodAccuracy upv{"UPV", 0, 0, 0, 0.0};
  auto score = [](MethodAccuracy& m, const SolveOutcome& outcome, const Question& q) {
    ++m.total;
    if (!outcome.final_answer.has_value())
      ++m.unknown;  // declined or errored: scored incorrect
    else if (answers_equal(*outcome.final_answer, *q.gold_answer, q.answer_type))
      ++m.correct;
  };

  for (size_t i = 0; i < n; ++i) {
    const Question& q = records[i].question;
    if (!q.gold_answer.has_value()) {
      ++result.row.skipped;
      continue;
    }
    if (cfg.run_majority) score(majority, result.majority_outcomes[i], q);
    if (cfg.run_upv) score(upv, result.upv_outcomes[i], q);
  }

  auto finish = [](MethodAccuracy& m) {
    m.accuracy = m.total > 0 ? static_cast<double>(m.correct) / m.total : 0.0;
  };
  if (cfg.run_majority) {
    finish(majority);
    result.row.methods.push_back(std::move(majority));
  }
  if (cfg.run_upv) {
    finish(upv);
    result.row.methods.push_back(std::move(upv));
  }
  return result;
}

AccuracyReport make_accuracy_report(const AnswerEvalConfig& cfg, std::vector<AnswerEvalRow> rows,
                                    std::string transcripts_path) {
  AccuracyReport report;
  report.k = cfg.upv.k;
  report.k_prime = cfg.upv.k_prime;
  report.rows = std::move(rows);
  report.transcripts_path = std::move(transcripts_path);

  AnswerEvalRow& overall = report.overall;
  overall.dataset = "Overall";
  for (const AnswerEvalRow& row : report.rows) {
    overall.skipped += row.skipped;
    for (const MethodAccuracy& m : row.methods) {
      auto it = std::find_if(overall.methods.begin(), overall.methods.end(),
                             [&](const MethodAccuracy& o) { return o.method == m.method; });
      if (it == overall.methods.end()) {
        overall.methods.push_back(m);
      } else {
        it->total += m.total;
        it->correct += m.correct;
        it->unknown += m.unknown;
      }
    }
  }
  for (MethodAccuracy& m : overall.methods)
    m.accuracy = m.total > 0 ? static_cast<double>(m.correct) / m.total : 0.0;
  return report;
}

// --- vote-count ablation -------------------------------------------------------

double exact_majority_match_probability(int k_prime, double flip_p, Verdict truth) {
  if (k_prime < 1) throw std::invalid_argument("k_prime must be at least 1");
  double p_valid_vote = truth == Verdict::Valid ? 1.0 - flip_p : flip_p;
  double match = 0.0;
  double coeff = 1.0;  // C(k, j), updated incrementally
  for (int j = 0; j <= k_prime; ++j) {
    if (j > 0) coeff = coeff * (k_prime - j + 1) / j;
    double prob = coeff * std::pow(p_valid_vote, j) * std::pow(1.0 - p_valid_vote, k_prime - j);
    Verdict majority = 2 * j > k_prime ? Verdict::Valid : Verdict::Invalid;
    if (majority == truth) match += prob;
  }
  return match;
}

KPrimeReport run_kprime_ablation(const std::vector<int>& k_values, double flip_probability,
                                 std::uint64_t seed, int trials, const PromptLibrary& prompts) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");

  std::vector<StochasticRule> rules = {{"case-valid", Verdict::Valid},
                                       {"case-invalid", Verdict::Invalid}};
  auto backend = std::make_shared<StochasticMockBackend>(rules, flip_probability, seed);
  Gateway gateway(backend, GatewayConfig{});

  // One synthetic single-step chain per trial; distinct text per trial keeps
  // the vote flips independent across trials.
  std::vector<ReasoningChain> chains;
  std::vector<Verdict> truths;
  chains.reserve(static_cast<size_t>(trials));
  for (int i = 0; i < trials; ++i) {
    Verdict truth = i % 2 == 0 ? Verdict::Valid : Verdict::Invalid;
    ReasoningChain chain;
    chain.question_ref = "trial-" + std::to_string(i);
    chain.premises.push_back({1, "Trial " + std::to_string(i) + " sets x to " +
                                     std::to_string(i) + ". What is x?"});
    ReasoningStep step;
    step.label = 2;
    step.cited_premises = {1};
    step.body = std::string(truth == Verdict::Valid ? "case-valid" : "case-invalid") +
                " trial " + std::to_string(i) + ": x equals " + std::to_string(i) +
                ". Final Step (by #1): the answer is " + std::to_string(i) + ".";
    step.is_final = true;
    chain.steps.push_back(std::move(step));
    chains.push_back(std::move(chain));
    truths.push_back(truth);
  }

  KPrimeReport report;
  report.flip_probability = flip_probability;
  report.seed = seed;
  report.trials = trials;

  int n_valid = (trials + 1) / 2;
  int n_invalid = trials / 2;
  for (int k_prime : k_values) {
    VerifierOptions opts;
    opts.shots = 0;
    opts.k_prime = k_prime;
    opts.model_name = "stochastic-mock";
    Verifier verifier(gateway, prompts, opts);

    int matched = 0;
    for (int i = 0; i < trials; ++i) {
      StepVerification sv = verifier.verify_step(chains[static_cast<size_t>(i)], 2);
      if (sv.verdict == truths[static_cast<size_t>(i)]) ++matched;
    }

    KPrimeRow row;
    row.k_prime = k_prime;
    row.stability = static_cast<double>(matched) / trials;
    row.exact = (n_valid * exact_majority_match_probability(k_prime, flip_probability,
                                                            Verdict::Valid) +
                 n_invalid * exact_majority_match_probability(k_prime, flip_probability,
                                                              Verdict::Invalid)) /
                trials;
    report.rows.push_back(row);
  }
  return report;
}

// --- report emission ----------------------------------------------------------

namespace {

std::string markdown_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string markdown_separator(size_t columns) {
  std::string out = "|";
  for (size_t i = 0; i < columns; ++i) out += " --- |";
  return out + "\n";
}

}  // namespace

std::string render_markdown(const VerificationReport& r) {
  std::ostringstream out;
  out << "# Verification accuracy\n\n";
  out << "Mode: " << r.mode << " | shots: " << r.shots << " | k': " << r.k_prime << "\n\n";

  std::vector<std::string> header = {"Class"};
  for (const auto& row : r.rows) header.push_back(row.dataset);
  if (!r.rows.empty()) header.push_back("Overall");
  out << markdown_row(header) << markdown_separator(header.size());

  if (!r.rows.empty()) {
    auto metric_row = [&](const std::string& name, auto pick) {
      std::vector<std::string> cells = {name};
      for (const auto& row : r.rows) cells.push_back(percent(pick(row)));
      cells.push_back(percent(pick(r.overall)));
      return markdown_row(cells);
    };
    out << metric_row("Correct", [](const VerificationRow& v) { return v.correct_class_accuracy; });
    out << metric_row("Wrong", [](const VerificationRow& v) { return v.wrong_class_accuracy; });
    out << metric_row("Average", [](const VerificationRow& v) { return v.average; });
  }
  return out.str();
}

std::string render_csv(const VerificationReport& r) {
  std::ostringstream out;
  out << "dataset,valid_total,valid_judged_valid,invalid_total,invalid_judged_invalid,"
         "correct_class_accuracy,wrong_class_accuracy,average\n";
  auto line = [&](const VerificationRow& v) {
    out << v.dataset << ',' << v.valid_total << ',' << v.valid_judged_valid << ','
        << v.invalid_total << ',' << v.invalid_judged_invalid << ','
        << fixed6(v.correct_class_accuracy) << ',' << fixed6(v.wrong_class_accuracy) << ','
        << fixed6(v.average) << '\n';
  };
  for (const auto& row : r.rows) line(row);
  if (!r.rows.empty()) line(r.overall);
  return out.str();
}

namespace {

nlohmann::ordered_json to_json(const VerificationRow& v) {
  return {{"dataset", v.dataset},
          {"valid_total", v.valid_total},
          {"valid_judged_valid", v.valid_judged_valid},
          {"invalid_total", v.invalid_total},
          {"invalid_judged_invalid", v.invalid_judged_invalid},
          {"correct_class_accuracy", v.correct_class_accuracy},
          {"wrong_class_accuracy", v.wrong_class_accuracy},
          {"average", v.average}};
}

nlohmann::ordered_json to_json(const MethodAccuracy& m) {
  return {{"method", m.method},
          {"total", m.total},
          {"correct", m.correct},
          {"unknown", m.unknown},
          {"accuracy", m.accuracy}};
}

nlohmann::ordered_json to_json(const AnswerEvalRow& row) {
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (const auto& m : row.methods) methods.push_back(to_json(m));
  return {{"dataset", row.dataset}, {"skipped", row.skipped}, {"methods", methods}};
}

}  // namespace

std::string render_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["report"] = "verification";
  j["mode"] = r.mode;
  j["shots"] = r.shots;
  j["k_prime"] = r.k_prime;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  j["datasets"] = rows;
  if (!r.rows.empty()) j["overall"] = to_json(r.overall);
  return j.dump(2) + "\n";
}

std::string render_markdown(const AccuracyReport& r) {
  std::ostringstream out;
  out << "# Final answer accuracy\n\n";
  out << "k: " << r.k << " | k': " << r.k_prime << "\n\n";

  std::vector<std::string> method_names;
  for (const auto& row : r.rows)
    for (const auto& m : row.methods)
      if (std::find(method_names.begin(), method_names.end(), m.method) == method_names.end())
        method_names.push_back(m.method);

  std::vector<std::string> header = {"Method"};
  for (const auto& row : r.rows) header.push_back(row.dataset);
  if (!r.rows.empty()) header.push_back("Overall");
  out << markdown_row(header) << markdown_separator(header.size());

  auto cell_for = [](const AnswerEvalRow& row, const std::string& method) -> std::string {
    for (const auto& m : row.methods)
      if (m.method == method) return percent(m.accuracy);
    return "-";
  };
  for (const auto& method : method_names) {
    std::vector<std::string> cells = {method};
    for (const auto& row : r.rows) cells.push_back(cell_for(row, method));
    cells.push_back(cell_for(r.overall, method));
    out << markdown_row(cells);
  }

  if (!r.rows.empty()) {
    out << "\n";
    for (const auto& row : r.rows) {
      out << "Unknown outputs (" << row.dataset << "):";
      for (size_t i = 0; i < row.methods.size(); ++i)
        out << (i == 0 ? " " : ", ") << row.methods[i].method << " " << row.methods[i].unknown;
      out << "; skipped " << row.skipped << "\n";
    }
  }
  if (!r.transcripts_path.empty()) out << "\nTranscripts: " << r.transcripts_path << "\n";
  return out.str();
}

std::string render_csv(const AccuracyReport& r) {
  std::ostringstream out;
  out << "dataset,method,total,correct,unknown,skipped,accuracy\n";
  auto line = [&](const AnswerEvalRow& row) {
    for (const auto& m : row.methods)
      out << row.dataset << ',' << m.method << ',' << m.total << ',' << m.correct << ','
          << m.unknown << ',' << row.skipped << ',' << fixed6(m.accuracy) << '\n';
  };
  for (const auto& row : r.rows) line(row);
  if (!r.rows.empty()) line(r.overall);
  return out.str();
}

std::string render_json(const AccuracyReport& r) {
  nlohmann::ordered_json j;
  j["report"] = "answer_accuracy";
  j["k"] = r.k;
  j["k_prime"] = r.k_prime;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  j["datasets"] = rows;
  if (!r.rows.empty()) j["overall"] = to_json(r.overall);
  if (!r.transcripts_path.empty()) j["transcripts"] = r.transcripts_path;
  return j.dump(2) + "\n";
}

std::string render_markdown(const KPrimeReport& r) {
  std::ostringstream out;
  out << "# Vote-count ablation\n\n";
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", r.flip_probability);
    out << "Flip probability: " << buf << " | trials: " << r.trials << " | seed: " << r.seed
        << "\n\n";
  }
  std::vector<std::string> header = {"Metric"};
  for (const auto& row : r.rows) header.push_back("k'=" + std::to_string(row.k_prime));
  out << markdown_row(header) << markdown_separator(header.size());

  if (!r.rows.empty()) {
    std::vector<std::string> stability = {"Stability"};
    std::vector<std::string> exact = {"Exact"};
    for (const auto& row : r.rows) {
      stability.push_back(percent(row.stability));
      exact.push_back(percent(row.exact));
    }
    out << markdown_row(stability) << markdown_row(exact);
  }
  return out.str();
}

std::string render_csv(const KPrimeReport& r) {
  std::ostringstream out;
  out << "k_prime,stability,exact\n";
  for (const auto& row : r.rows)
    out << row.k_prime << ',' << fixed6(row.stability) << ',' << fixed6(row.exact) << '\n';
  return out.str();
}

std::string render_json(const KPrimeReport& r) {
  nlohmann::ordered_json j;
  j["report"] = "kprime_ablation";
  j["flip_probability"] = r.flip_probability;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"k_prime", row.k_prime}, {"stability", row.stability}, {"exact", row.exact}});
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

template <typename Report>
void emit_report(const Report& r, ReportFormat format, const std::string& path) {
  write_file_atomic(path, render_report(r, format));
}

template void emit_report<VerificationReport>(const VerificationReport&, ReportFormat,
                                              const std::string&);
template void emit_report<AccuracyReport>(const AccuracyReport&, ReportFormat,
                                          const std::string&);
template void emit_report<KPrimeReport>(const KPrimeReport&, ReportFormat, const std::string&);

// --- run manifest ---------------------------------------------------------------

std::string render_run_manifest(const RunInfo& info) {
  nlohmann::ordered_json j;
  j["command"] = info.command;
  j["backend"] = info.backend;
  j["model"] = info.model_name;
  j["config"] = {{"k", info.config.k},
                 {"k_prime", info.config.k_prime},
                 {"temperature", info.config.temperature},
                 {"structural_failure_is_invalid", info.config.structural_failure_is_invalid},
                 {"fallback", info.config.fallback == Fallback::Unknown ? "unknown" : "plurality"}};
  j["seed"] = info.seed;
  j["dataset"] = info.dataset_path;
  nlohmann::ordered_json digests;
  for (const auto& [name, digest] : info.prompt_digests) digests[name] = digest;
  j["prompt_digests"] = digests;
  return j.dump(2) + "\n";
}

std::string render_transcripts(const std::vector<SolveOutcome>& outcomes) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SolveOutcome& o : outcomes) {
    nlohmann::ordered_json entry;
    entry["question"] = o.question_ref;
    entry["method"] = to_string(o.method);
    entry["final_answer"] =
        o.final_answer.has_value() ? nlohmann::ordered_json(*o.final_answer) : nullptr;
    if (o.error.has_value()) entry["error"] = *o.error;

    nlohmann::ordered_json vote = nlohmann::ordered_json::array();
    for (const AnswerTally& t : o.vote)
      vote.push_back({{"answer", t.representative}, {"count", t.count},
                      {"first_index", t.first_index}});
    entry["vote"] = vote;

    nlohmann::ordered_json chains = nlohmann::ordered_json::array();
    for (const ChainCandidate& c : o.chains) {
      nlohmann::ordered_json cj;
      cj["sample_index"] = c.sample_index;
      cj["answer"] = c.extraction.value.has_value() ? nlohmann::ordered_json(*c.extraction.value)
                                                    : nullptr;
      cj["structure_ok"] = c.parse_report.ok;
      if (c.verification.has_value()) {
        cj["verdict"] = to_string(c.verification->verdict);
        nlohmann::ordered_json steps = nlohmann::ordered_json::array();
        for (const StepVerification& sv : c.verification->steps) {
          nlohmann::ordered_json votes = nlohmann::ordered_json::array();
          for (Verdict v : sv.votes) votes.push_back(to_string(v));
          steps.push_back({{"step", sv.step_label},
                           {"votes", votes},
                           {"verdict", to_string(sv.verdict)}});
        }
        cj["steps"] = steps;
      }
      chains.push_back(cj);
    }
    entry["chains"] = chains;
    arr.push_back(entry);
  }
  return arr.dump(2) + "\n";
}

}  // namespace natprog
