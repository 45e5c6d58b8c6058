#pragma once

// Verifiable rewards with a format penalty.
//
// A binary correctness verifier alone can be satisfied by a response with
// an empty or degenerate reasoning trace. The format check rejects missing
// or malformed think tags, too-short reasoning and repetitive reasoning;
// a failed check subtracts `penalty_weight` from the correctness bit.

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "cybereval/extraction.hpp"
#include "cybereval/text.hpp"

namespace cybereval::reward {

struct FormatPolicy {
  bool require_think_tags = true;
  std::size_t min_reasoning_chars = 50;
  double max_repetition_ratio = 0.5;
  double penalty_weight = 1.0;

  /// Throws ConfigError when a field is out of range.
  void validate() const {
    if (!(max_repetition_ratio >= 0.0 && max_repetition_ratio <= 1.0)) {
      throw ConfigError("max_repetition_ratio must lie in [0, 1]");
    }
    if (!(penalty_weight >= 0.0)) throw ConfigError("penalty_weight must be >= 0");
  }
};

struct FormatVerdict {
  bool tags_ok = false;
  bool length_ok = false;
  bool repetition_ok = false;
  bool passed = false;

  friend bool operator==(const FormatVerdict&, const FormatVerdict&) = default;
};

struct RewardSignal {
  int correctness = 0;
  FormatVerdict verdict;
  double total = 0.0;
};

/// 1 - distinct/total over whitespace-separated word bigrams (lower-cased).
/// Texts with fewer than two words score 0.
inline double repetition_ratio(std::string_view reasoning) {
  const auto w = text::words(reasoning);
  if (w.size() < 2) return 0.0;
  std::set<std::pair<std::string, std::string>> distinct;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    distinct.emplace(text::lower(w[k]), text::lower(w[k + 1]));
  }
  const double total = static_cast<double>(w.size() - 1);
  return 1.0 - static_cast<double>(distinct.size()) / total;
}

inline FormatVerdict check_format(const ModelResponse& response, const FormatPolicy& policy) {
  FormatVerdict v;
  v.tags_ok = !policy.require_think_tags || response.tags_well_formed();

  const std::string_view reasoning =
      response.reasoning ? text::trim(*response.reasoning) : std::string_view{};
  v.length_ok = text::utf8_length(reasoning) >= policy.min_reasoning_chars;
  v.repetition_ok = repetition_ratio(reasoning) <= policy.max_repetition_ratio;
  v.passed = v.tags_ok && v.length_ok && v.repetition_ok;
  return v;
}

inline RewardSignal compute_reward(int correct, const FormatVerdict& verdict,
                                   const FormatPolicy& policy) {
  RewardSignal r;
  r.correctness = correct != 0 ? 1 : 0;
  r.verdict = verdict;
  r.total = static_cast<double>(r.correctness) - (verdict.passed ? 0.0 : policy.penalty_weight);
  return r;
}

inline RewardSignal compute_reward(bool correct, const ModelResponse& response,
                                   const FormatPolicy& policy) {
  return compute_reward(correct ? 1 : 0, check_format(response, policy), policy);
}

}  // namespace cybereval::reward
