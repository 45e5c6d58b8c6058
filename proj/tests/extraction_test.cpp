#include <fstream>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "cybereval/extraction.hpp"
#include "json.hpp"

namespace {

using namespace cybereval;

TEST(SplitReasoning, WellFormedBlock) {
  auto r = split_reasoning("<think>steps</think>Answer: A");
  ASSERT_TRUE(r.reasoning.has_value());
  EXPECT_EQ(*r.reasoning, "steps");
  EXPECT_EQ(r.visible, "Answer: A");
  EXPECT_EQ(r.tags, ThinkTags::WellFormed);
}

TEST(SplitReasoning, NoTags) {
  auto r = split_reasoning("Answer: B");
  EXPECT_FALSE(r.reasoning.has_value());
  EXPECT_EQ(r.visible, "Answer: B");
  EXPECT_EQ(r.tags, ThinkTags::Absent);
}

TEST(SplitReasoning, DegenerateTrace) {
  auto r = split_reasoning("<think> No</think>Answer: C");
  ASSERT_TRUE(r.reasoning.has_value());
  EXPECT_EQ(*r.reasoning, " No");
  EXPECT_EQ(r.visible, "Answer: C");
}

TEST(SplitReasoning, UnclosedTagIsFlagged) {
  const std::string raw = "<think>still thinking\nAnswer: A";
  auto r = split_reasoning(raw);
  EXPECT_FALSE(r.reasoning.has_value());
  EXPECT_EQ(r.visible, raw);
  EXPECT_EQ(r.tags, ThinkTags::Unclosed);
}

TEST(SplitReasoning, StrayCloseTagIsFlagged) {
  const std::string raw = "reasoning without opener</think>\nAnswer: A";
  auto r = split_reasoning(raw);
  EXPECT_FALSE(r.reasoning.has_value());
  EXPECT_EQ(r.visible, raw);
  EXPECT_EQ(r.tags, ThinkTags::Unopened);
}

TEST(SplitReasoning, OnlyFirstBlockIsReasoning) {
  auto r = split_reasoning("<think>one</think>mid<think>two</think>Answer: D");
  ASSERT_TRUE(r.reasoning.has_value());
  EXPECT_EQ(*r.reasoning, "one");
  EXPECT_EQ(r.visible, "mid<think>two</think>Answer: D");
  EXPECT_EQ(r.tags, ThinkTags::Multiple);
}

TEST(SplitReasoning, TrimsSurroundingWhitespaceOnly) {
  auto r = split_reasoning("<think>x</think>\n\n  line one\n  Answer: A  \n");
  EXPECT_EQ(r.visible, "line one\n  Answer: A");
}

TEST(SplitReasoning, RecombinationRecoversRaw) {
  std::mt19937 rng(7);
  const std::vector<std::string> pieces = {"a", " ", "\n", "Answer: B", "x y", "T1059", "\t"};
  auto random_text = [&](int n) {
    std::string s;
    for (int k = 0; k < n; ++k) s += pieces[rng() % pieces.size()];
    return s;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const std::string reasoning = random_text(static_cast<int>(rng() % 6));
    const std::string tail = random_text(static_cast<int>(rng() % 6));
    const std::string raw = "<think>" + reasoning + "</think>" + tail;
    auto r = split_reasoning(raw);
    ASSERT_EQ(r.tags, ThinkTags::WellFormed);
    ASSERT_EQ(*r.reasoning, reasoning);
    // Re-attaching the block reproduces the raw text up to the trimmed tail.
    ASSERT_EQ("<think>" + *r.reasoning + "</think>" + r.visible,
              "<think>" + reasoning + "</think>" + std::string(text::trim(tail)));
  }
}

ExtractedAnswer extract(const std::string& raw, AnswerKind kind) {
  return extract_answer(split_reasoning(raw), kind);
}

TEST(ExtractAnswer, McqaLetter) {
  EXPECT_EQ(extract("...\nAnswer: B", AnswerKind::McqaLetter).letter(), 'B');
}

TEST(ExtractAnswer, McqaVariants) {
  EXPECT_EQ(extract("Answer: (B)", AnswerKind::McqaLetter).letter(), 'B');
  EXPECT_EQ(extract("Answer: B.", AnswerKind::McqaLetter).letter(), 'B');
  EXPECT_EQ(extract("Answer: A, B", AnswerKind::McqaLetter).letter(), 'A');
  EXPECT_THROW(extract("Answer: AB", AnswerKind::McqaLetter), ExtractionFailed);
}

TEST(ExtractAnswer, CweId) {
  EXPECT_EQ(extract("...\nCWE ID: CWE-79", AnswerKind::CweId).cwe().to_string(), "CWE-79");
  EXPECT_EQ(extract("Final Answer: CWE-79", AnswerKind::CweId).cwe(), CweId{79});
}

TEST(ExtractAnswer, TechniquesStripSubtechniquesAndDedupe) {
  auto a = extract("...\nAnswer: T1059, T1059.001, T1566", AnswerKind::TechniqueIdSet);
  EXPECT_EQ(a.technique_ids().to_vector(), (std::vector<std::string>{"T1059", "T1566"}));
}

TEST(ExtractAnswer, RefusalFails) {
  EXPECT_THROW(extract("I cannot determine this.", AnswerKind::McqaLetter), ExtractionFailed);
  EXPECT_FALSE(try_extract_answer(split_reasoning(""), AnswerKind::CweId).has_value());
}

TEST(ExtractAnswer, ReasoningIsNeverScanned) {
  EXPECT_FALSE(
      try_extract_answer(split_reasoning("<think>Answer: A</think>"), AnswerKind::McqaLetter));
}

TEST(ExtractAnswer, LastLineWins) {
  const std::vector<char> letters = {'A', 'B', 'C', 'D'};
  for (char first : letters) {
    for (char second : letters) {
      const std::string raw = std::string("Answer: ") + first + "\nmore thoughts\nAnswer: " + second;
      EXPECT_EQ(extract(raw, AnswerKind::McqaLetter).letter(), second);
    }
  }
  EXPECT_EQ(extract("CWE ID: CWE-20\nCWE ID: CWE-787", AnswerKind::CweId).cwe(), CweId{787});
}

TEST(ExtractAnswer, IdempotentOnCanonicalLine) {
  const std::vector<std::pair<std::string, AnswerKind>> inputs = {
      {"**Answer:** (C)", AnswerKind::McqaLetter},
      {"`cwe id: cwe-0089`", AnswerKind::CweId},
      {"Vector: CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H.", AnswerKind::CvssVectorString},
      {"Answer: t1566.002, T1059, T1059", AnswerKind::TechniqueIdSet},
  };
  for (const auto& [raw, kind] : inputs) {
    const auto first = extract(raw, kind);
    const auto again = extract(first.canonical_line(), kind);
    EXPECT_EQ(first, again) << raw;
    EXPECT_EQ(again.canonical_line(), first.canonical_line());
  }
}

TEST(ExtractAnswer, TechniqueOutputHasNoDotsOrDuplicates) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::string line = "Answer: ";
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) {
      if (k > 0) line += ", ";
      line += "T" + std::to_string(1000 + rng() % 30);
      if (rng() % 2) line += "." + std::to_string(rng() % 5 + 1);
    }
    const auto a = extract(line, AnswerKind::TechniqueIdSet);
    std::set<std::string> seen;
    for (const auto& id : a.technique_ids()) {
      EXPECT_EQ(id.find('.'), std::string::npos);
      EXPECT_TRUE(seen.insert(id).second);
    }
  }
}

AnswerKind corpus_kind(const std::string& name) {
  if (name == "mcqa") return AnswerKind::McqaLetter;
  if (name == "cwe") return AnswerKind::CweId;
  if (name == "vsp") return AnswerKind::CvssVectorString;
  return AnswerKind::TechniqueIdSet;
}

TEST(ExtractAnswer, CuratedCorpus) {
  std::ifstream in(std::string(CYBEREVAL_TEST_DATA) + "/extraction_corpus.jsonl");
  ASSERT_TRUE(in);
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    const auto c = nlohmann::json::parse(line);
    const auto got = try_extract_answer(split_reasoning(c["response"].get<std::string>()),
                                        corpus_kind(c["kind"].get<std::string>()));
    if (c["expected"].is_null()) {
      EXPECT_FALSE(got.has_value()) << c["name"] << " extracted " << got->canonical_line();
    } else {
      ASSERT_TRUE(got.has_value()) << c["name"];
      EXPECT_EQ(got->canonical_line(), c["expected"].get<std::string>()) << c["name"];
    }
    ++cases;
  }
  EXPECT_GE(cases, 60);
}

}  // namespace
