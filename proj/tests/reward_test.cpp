#include <random>
#include <string>

#include <gtest/gtest.h>

#include "cybereval/reward.hpp"

namespace {

using namespace cybereval;
using namespace cybereval::reward;

const std::string kVaried =
    "The advisory describes a heap overflow reachable from an unauthenticated network "
    "request, so the attack vector is network and no privileges are needed. Option A "
    "is the only choice that reflects memory corruption rather than injection or misconfig.";

TEST(CheckFormat, VariedReasoningPasses) {
  ASSERT_GE(kVaried.size(), 200u);
  const auto v = check_format(split_reasoning("<think>" + kVaried + "</think>Answer: A"), {});
  EXPECT_TRUE(v.tags_ok);
  EXPECT_TRUE(v.length_ok);
  EXPECT_TRUE(v.repetition_ok);
  EXPECT_TRUE(v.passed);
}

TEST(CheckFormat, DegenerateTraceFailsLength) {
  const auto v = check_format(split_reasoning("<think> No</think>Answer: A"), {});
  EXPECT_TRUE(v.tags_ok);
  EXPECT_FALSE(v.length_ok);
  EXPECT_FALSE(v.passed);
}

TEST(CheckFormat, MissingTagsFail) {
  const auto v = check_format(split_reasoning("Answer: A"), {});
  EXPECT_FALSE(v.tags_ok);
  EXPECT_FALSE(v.passed);
}

TEST(CheckFormat, MalformedTagsFail) {
  const std::string body = "<think>" + kVaried;
  EXPECT_FALSE(check_format(split_reasoning(body + "\nAnswer: A"), {}).tags_ok);
  EXPECT_FALSE(check_format(split_reasoning(kVaried + "</think>Answer: A"), {}).tags_ok);
  EXPECT_FALSE(
      check_format(split_reasoning(body + "</think><think>again</think>Answer: A"), {}).tags_ok);
}

TEST(CheckFormat, RepetitiveReasoningFails) {
  std::string go;
  for (int k = 0; k < 50; ++k) go += "go ";
  // 49 bigrams, one distinct: ratio 48/49.
  EXPECT_DOUBLE_EQ(repetition_ratio(go), 48.0 / 49.0);
  const auto v = check_format(split_reasoning("<think>" + go + "</think>Answer: A"), {});
  EXPECT_TRUE(v.tags_ok);
  EXPECT_TRUE(v.length_ok);
  EXPECT_FALSE(v.repetition_ok);
  EXPECT_FALSE(v.passed);
}

TEST(CheckFormat, RepetitionRatioEdgeCases) {
  EXPECT_EQ(repetition_ratio(""), 0.0);
  EXPECT_EQ(repetition_ratio("single"), 0.0);
  EXPECT_EQ(repetition_ratio("a b"), 0.0);
  EXPECT_DOUBLE_EQ(repetition_ratio("a b a b"), 1.0 - 2.0 / 3.0);
}

TEST(CheckFormat, TagsOptionalWhenNotRequired) {
  FormatPolicy p;
  p.require_think_tags = false;
  p.min_reasoning_chars = 0;
  EXPECT_TRUE(check_format(split_reasoning("Answer: A"), p).passed);
}

TEST(CheckFormat, IgnoresContentOutsideThinkBlock) {
  const FormatPolicy p;
  const auto base = check_format(split_reasoning("<think>" + kVaried + "</think>Answer: A"), p);
  for (const std::string tail : {"", "Answer: B", "go go go go go go go", "\n\n**x**"}) {
    EXPECT_EQ(check_format(split_reasoning("<think>" + kVaried + "</think>" + tail), p), base);
  }
}

TEST(ComputeReward, Examples) {
  const FormatPolicy p;
  const FormatVerdict ok{true, true, true, true};
  const FormatVerdict bad{false, true, true, false};
  EXPECT_EQ(compute_reward(1, ok, p).total, 1.0);
  EXPECT_EQ(compute_reward(1, bad, p).total, 0.0);
  EXPECT_EQ(compute_reward(0, bad, p).total, -1.0);
  EXPECT_EQ(compute_reward(0, ok, p).total, 0.0);
}

TEST(ComputeReward, AntiHackingOrderingForHeavyPenalties) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> weight(1.0, 5.0);
  for (int k = 0; k < 500; ++k) {
    FormatPolicy p;
    p.penalty_weight = weight(rng);
    const FormatVerdict bad{rng() % 2 == 0, rng() % 2 == 0, false, false};
    const FormatVerdict ok{true, true, true, true};
    EXPECT_LE(compute_reward(1, bad, p).total, compute_reward(0, ok, p).total);
  }
}

TEST(ComputeReward, Monotone) {
  const FormatPolicy p;
  for (bool passed : {false, true}) {
    const FormatVerdict v{passed, passed, passed, passed};
    EXPECT_GE(compute_reward(1, v, p).total, compute_reward(0, v, p).total);
  }
  for (int correct : {0, 1}) {
    EXPECT_GE(compute_reward(correct, FormatVerdict{true, true, true, true}, p).total,
              compute_reward(correct, FormatVerdict{true, false, true, false}, p).total);
  }
}

TEST(FormatPolicy, Validation) {
  FormatPolicy p;
  p.max_repetition_ratio = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.penalty_weight = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
}

}  // namespace
