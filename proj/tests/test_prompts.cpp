#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "natprog/digest.hpp"
#include "natprog/prompts.hpp"

using namespace natprog;

namespace {

std::string fixture(const std::string& rel) {
  return read_file(std::string(NATPROG_FIXTURE_DIR) + "/" + rel);
}

PromptLibrary library() { return PromptLibrary::load(NATPROG_ASSET_DIR); }

Question cars_question() {
  Question q;
  q.id = "cars";
  q.question_text =
      "There are 3 cars in the parking lot. 2 more cars arrive. How many cars are in the "
      "parking lot?";
  q.answer_type = AnswerType::Number;
  q.task_family = TaskFamily::MathWord;
  return q;
}

PremiseContext cars_context() {
  PremiseContext ctx;
  ctx.step_label = 4;
  ctx.entries = {{1, "There are 3 cars in the parking lot."}, {2, "2 more cars arrive."}};
  ctx.step_body = "There are 3 + 2 = 5 cars in the parking lot now.";
  return ctx;
}

const std::string kCarsChain =
    "First, let's write down all the statements and relationships in the question with "
    "labels.\n\n#1. There are 3 cars in the parking lot.\n#2. 2 more cars arrive.\n#3. How many "
    "cars are in the parking lot?\n\nNext, let's answer the question step by step with reference "
    "to the question and reasoning process:\n\n#4. (by #1 #2) There are 3 + 2 = 5 cars in the "
    "parking lot now.\n#5. (by #3 #4) Final Step: The answer is 5.";

}  // namespace

TEST_CASE("generation prompts match the golden renders byte for byte") {
  PromptLibrary lib = library();

  CHECK(lib.generation_prompt(cars_question()) == fixture("golden/gen_math_word.txt"));

  Question mc;
  mc.id = "mc";
  mc.question_text = "If 5x = 20, what is the value of x?";
  mc.answer_type = AnswerType::MultipleChoice;
  mc.task_family = TaskFamily::MathWordMC;
  mc.choices = std::vector<Choice>{{"A", "2"}, {"B", "4"}, {"C", "6"}};
  CHECK(lib.generation_prompt(mc) == fixture("golden/gen_math_word_mc.txt"));

  Question date;
  date.id = "date";
  date.question_text =
      "Today is 03/05/2022. What is the date one week from today? Please answer in the format "
      "MM/DD/YYYY.";
  date.answer_type = AnswerType::Date;
  date.task_family = TaskFamily::DateUnderstanding;
  CHECK(lib.generation_prompt(date) == fixture("golden/gen_date.txt"));

  Question letters;
  letters.id = "letters";
  letters.question_text =
      "Take the last letters of each word in \"Larry Page\" and concatenate them.";
  letters.answer_type = AnswerType::FreeText;
  letters.task_family = TaskFamily::LastLetters;
  CHECK(lib.generation_prompt(letters) == fixture("golden/gen_last_letters.txt"));
}

TEST_CASE("step verification prompts match the golden renders") {
  PromptLibrary lib = library();
  CHECK(lib.step_verification_prompt(cars_context(), 1) ==
        fixture("golden/verify_step_oneshot.txt"));
  CHECK(lib.step_verification_prompt(cars_context(), 0) ==
        fixture("golden/verify_step_zeroshot.txt"));
  CHECK_THROWS_AS(lib.step_verification_prompt(cars_context(), 2), std::invalid_argument);
}

TEST_CASE("whole chain prompts match the golden renders") {
  PromptLibrary lib = library();
  CHECK(lib.whole_chain_prompt(cars_question(), kCarsChain, ChainVerifyMode::ZeroShot) ==
        fixture("golden/whole_chain_zeroshot.txt"));
  CHECK(lib.whole_chain_prompt(cars_question(), kCarsChain, ChainVerifyMode::TwoShot) ==
        fixture("golden/whole_chain_twoshot.txt"));
}

TEST_CASE("prompts carry the pinned instruction sentences") {
  PromptLibrary lib = library();
  std::string gen = lib.generation_prompt(cars_question());
  CHECK(gen.find("First, let's write down all the statements and relationships in the question "
                 "with labels.") != std::string::npos);
  CHECK(gen.find("Next, let's answer the question step by step with reference to the question "
                 "and reasoning process:") != std::string::npos);

  std::string step = lib.step_verification_prompt(cars_context(), 0);
  CHECK(step.find("Here is some information:") != std::string::npos);
  CHECK(step.find("Double-check the reasoning process, let's analyze its correctness, and end "
                  "with \"yes\" or \"no\".") != std::string::npos);
  CHECK(step.find("Let's think step by step without any assumptions.") != std::string::npos);

  std::string zero = lib.whole_chain_prompt(cars_question(), kCarsChain, ChainVerifyMode::ZeroShot);
  std::string suffix = "Do you think the above reasoning process is correct? Let's think step by step";
  REQUIRE(zero.size() >= suffix.size());
  CHECK(zero.substr(zero.size() - suffix.size()) == suffix);
}

TEST_CASE("context entries are renumbered locally from 1") {
  PremiseContext ctx;
  ctx.step_label = 9;
  ctx.entries = {{4, "alpha"}, {7, "beta"}};
  ctx.step_body = "gamma";
  std::string prompt = library().step_verification_prompt(ctx, 0);
  CHECK(prompt.find("1. alpha\n2. beta") != std::string::npos);
  CHECK(prompt.find("#4") == std::string::npos);
  CHECK(prompt.find("\"gamma\"") != std::string::npos);
}

TEST_CASE("substituted values are never rescanned for placeholders") {
  Question q = cars_question();
  q.question_text = "What does the literal token {PREMISE_CONTEXT} mean here?";
  std::string prompt = library().generation_prompt(q);
  CHECK(prompt.find("{PREMISE_CONTEXT}") != std::string::npos);
}

TEST_CASE("multiple choice generation requires choices") {
  Question q;
  q.id = "mc";
  q.question_text = "Pick one.";
  q.answer_type = AnswerType::MultipleChoice;
  q.task_family = TaskFamily::MathWordMC;
  CHECK_THROWS_AS(library().generation_prompt(q), std::invalid_argument);
}

TEST_CASE("library refuses assets that drifted from the manifest") {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "natprog_prompt_drift";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  fs::copy(fs::path(NATPROG_ASSET_DIR), tmp, fs::copy_options::recursive);

  {
    std::ofstream out(tmp / "prompts" / "gen_date.txt", std::ios::app | std::ios::binary);
    out << "x";
  }
  CHECK_THROWS_AS(PromptLibrary::load(tmp.string()), std::runtime_error);

  fs::remove(tmp / "prompts" / "manifest.json");
  CHECK_THROWS_AS(PromptLibrary::load(tmp.string()), std::runtime_error);
  fs::remove_all(tmp);
}

TEST_CASE("digest listing covers every prompt asset") {
  PromptLibrary lib = library();
  const auto& digests = lib.digests();
  CHECK(digests.size() == 8);
  for (const auto& [name, digest] : digests) {
    CHECK(digest.size() == 64);
    std::string path = std::string(NATPROG_ASSET_DIR) + "/prompts/" + name;
    CHECK(sha256_hex(read_file(path)) == digest);
  }
}
