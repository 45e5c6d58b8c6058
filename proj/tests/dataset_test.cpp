#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cybereval/harness/config.hpp"
#include "cybereval/harness/dataset.hpp"
#include "cybereval/harness/prompts.hpp"

namespace {

using namespace cybereval;
using namespace cybereval::harness;

std::vector<BenchmarkTask> load(const std::string& text) {
  std::istringstream in(text);
  return load_dataset(in);
}

const char* kThreeMcqa =
    R"({"id":"a","kind":"mcqa","question":"Q1?","options":["w","x","y","z"],"gold":"A"})"
    "\n"
    R"({"id":"b","kind":"mcqa","question":"Q2?","options":["w","x","y","z"],"gold":"b"})"
    "\n\n"
    R"({"id":"c","kind":"mcqa","question":"Q3?","options":{"A":"w","B":"x","C":"y","D":"z"},"gold":"D"})"
    "\n";

TEST(LoadDataset, WellFormedMcqa) {
  const auto tasks = load(kThreeMcqa);
  ASSERT_EQ(tasks.size(), 3u);
  EXPECT_EQ(tasks[1].id, "b");
  EXPECT_EQ(std::get<char>(tasks[1].gold), 'B');
  EXPECT_EQ((*tasks[2].options)[3], "z");
}

TEST(LoadDataset, MissingGoldReportsLine) {
  try {
    load(std::string(kThreeMcqa) +
         R"({"id":"d","kind":"mcqa","question":"Q?","options":["w","x","y","z"]})" + "\n");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("gold"), std::string::npos);
  }
}

TEST(LoadDataset, DuplicateId) {
  EXPECT_THROW(load(std::string(kThreeMcqa) +
                    R"({"id":"a","kind":"mcqa","question":"Q?","options":["w","x","y","z"],"gold":"A"})"),
               DuplicateId);
}

TEST(LoadDataset, VspGoldIsParsedVector) {
  const auto tasks =
      load(R"({"id":"v","kind":"vsp","question":"CVE...","gold":"CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"})");
  ASSERT_EQ(tasks.size(), 1u);
  const auto& v = std::get<cvss::CvssVector>(tasks[0].gold);
  EXPECT_EQ(cvss::base_score(v).tenths(), 98);
}

TEST(LoadDataset, SchemaViolations) {
  EXPECT_THROW(load(R"({"id":"v","kind":"vsp","question":"q","gold":"CVSS:3.1/AV:N"})"), SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"essay","question":"q","gold":"A"})"), SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"mcqa","question":"q","gold":"A"})"), SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"mcqa","question":"q","options":["a","b","c"],"gold":"A"})"),
               SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"mcqa","question":"q","options":["a","b","c","d"],"gold":"E"})"),
               SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"rcm","question":"q","options":["a","b","c","d"],"gold":"CWE-79"})"),
               SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"rcm","question":"q","gold":"79"})"), SchemaError);
  EXPECT_THROW(load(R"({"id":"x","kind":"ate","question":"q","gold":["T1059","nope"]})"), SchemaError);
  EXPECT_THROW(load(R"({"id":7,"kind":"rcm","question":"q","gold":"CWE-79"})"), SchemaError);
  EXPECT_THROW(load("{not json"), SchemaError);
}

TEST(LoadDataset, AteGoldFormats) {
  const auto tasks = load(
      R"({"id":"a","kind":"ate","question":"t","platform":"enterprise","gold":["T1059.001","T1566"]})"
      "\n"
      R"({"id":"b","kind":"ate","question":"t","platform":"enterprise","gold":"T1059, T1003"})");
  EXPECT_EQ(std::get<techniques::TechniqueSet>(tasks[0].gold).join(), "T1059, T1566");
  EXPECT_EQ(std::get<techniques::TechniqueSet>(tasks[1].gold).join(), "T1003, T1059");
}

BenchmarkTask task_of(const std::string& line) { return load(line).front(); }

TEST(RenderPrompt, McqaIsByteExact) {
  const auto messages = render_prompt(task_of(
      R"({"id":"a","kind":"mcqa","question":"Which port does SSH use?","options":["21","22","23","25"],"gold":"B"})"));
  ASSERT_EQ(messages.size(), 1u);
  EXPECT_EQ(messages[0].role, "user");
  EXPECT_EQ(messages[0].content,
            "Given the following question and four candidate answers (A, B, C, and D), \n"
            "choose the best answer. The last line of your response should be in the following \n"
            "format: 'Answer: $LETTER' (without quotes) where $LETTER is one of A, B, C, or D.\n"
            "\n"
            "Question: Which port does SSH use?\n"
            "\n"
            "A. 21\n"
            "B. 22\n"
            "C. 23\n"
            "D. 25");
}

TEST(RenderPrompt, RcmAndCwePrediction) {
  const auto rcm = render_user_prompt(task_of(R"({"id":"r","kind":"rcm","question":"CVE-1 text","gold":"CWE-79"})"));
  EXPECT_NE(rcm.find("format `CWE ID: CWE-$id`"), std::string::npos);
  EXPECT_NE(rcm.find("Analyze the following CVE description"), std::string::npos);
  EXPECT_TRUE(rcm.ends_with("\n\nCVE-1 text"));
  const auto cwe = render_user_prompt(
      task_of(R"({"id":"r","kind":"cwe_prediction","question":"desc","gold":"CWE-79"})"));
  EXPECT_NE(cwe.find("Analyze the following vulnerability description"), std::string::npos);
}

TEST(RenderPrompt, VspCarriesExampleVector) {
  const auto vsp = render_user_prompt(task_of(
      R"({"id":"v","kind":"vsp","question":"desc","gold":"CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"})"));
  EXPECT_NE(vsp.find("determine the CVSS v3.1 vector string"), std::string::npos);
  EXPECT_NE(vsp.find("in format:\nCVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H\n\ndesc"),
            std::string::npos);
}

TEST(RenderPrompt, AteSubstitutesPlatformAndReferences) {
  const auto with_refs = render_user_prompt(task_of(
      R"({"id":"t","kind":"ate","question":"report text","platform":"enterprise","reference_ids":["T1059","T1566"],"gold":["T1059"]})"));
  EXPECT_NE(with_refs.find("Extract all MITRE enterprise attack patterns"), std::string::npos);
  EXPECT_NE(with_refs.find("Answer: T1234, T5678, T9012\n"), std::string::npos);
  EXPECT_NE(with_refs.find("mandatory.\n\nReference technique IDs: T1059, T1566\n\nreport text"),
            std::string::npos);
  EXPECT_EQ(with_refs.find("{{"), std::string::npos);

  const auto without = render_user_prompt(
      task_of(R"({"id":"t","kind":"ate","question":"report text","platform":"mobile","gold":["T1059"]})"));
  EXPECT_NE(without.find("This final line is mandatory.\n\nreport text"), std::string::npos);
}

TEST(RenderPrompt, AteWithoutPlatform) {
  EXPECT_THROW(render_prompt(task_of(R"({"id":"t","kind":"ate","question":"q","gold":["T1059"]})")),
               MissingField);
}

TEST(RenderPrompt, OptionalSystemMessage) {
  const auto task = task_of(R"({"id":"r","kind":"rcm","question":"q","gold":"CWE-79"})");
  const auto messages = render_prompt(task, std::string("You are a security analyst."));
  ASSERT_EQ(messages.size(), 2u);
  EXPECT_EQ(messages[0], (ChatMessage{"system", "You are a security analyst."}));
  EXPECT_EQ(messages[1].role, "user");
}

TEST(Config, RoundTripAndOverrides) {
  HarnessConfig cfg;
  cfg.trial.trials = 3;
  cfg.format.min_reasoning_chars = 10;
  cfg.endpoint.model = "m";
  const auto back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(back.trial.trials, 3u);
  EXPECT_EQ(back.format.min_reasoning_chars, 10u);
  EXPECT_EQ(back.endpoint.model, "m");
  EXPECT_EQ(back.trial.temperature, 0.6);
  EXPECT_EQ(back.trial.top_p, 0.95);
}

TEST(Config, Rejections) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"trial":{"trails":5}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"trial":{"top_p":1.5}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"trial":{"trials":0}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"trial":{"temperature":"hot"}})")),
               ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"format_policy":{"max_repetition_ratio":2}})")),
               ConfigError);
}

}  // namespace
