#pragma once

// Group-relative advantages, loss aggregation and the KL regularizer used
// in GRPO-style training. Values only: there is no model or optimizer here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cybereval/error.hpp"

namespace cybereval::grpo {

struct RlConfig {
  std::size_t group_size = 5;
  double kl_coefficient = 0.02;
  double advantage_epsilon = 1e-8;
};

/// Rewards and per-token surrogate-loss terms for one prompt's rollouts.
struct RolloutGroup {
  std::vector<double> rewards;
  std::vector<std::vector<double>> token_losses;

  std::size_t size() const noexcept { return rewards.size(); }

  std::size_t max_length() const {
    std::size_t longest = 0;
    for (const auto& t : token_losses) longest = std::max(longest, t.size());
    return longest;
  }

  /// Throws InvalidGroup / GroupTooSmall on a malformed group.
  void validate() const {
    if (rewards.size() != token_losses.size()) {
      throw InvalidGroup("rewards and token_losses differ in length (" +
                         std::to_string(rewards.size()) + " vs " +
                         std::to_string(token_losses.size()) + ")");
    }
    if (rewards.size() < 2) throw GroupTooSmall("a rollout group needs at least 2 responses");
    for (std::size_t k = 0; k < token_losses.size(); ++k) {
      if (token_losses[k].empty()) {
        throw InvalidGroup("response " + std::to_string(k) + " has no tokens");
      }
    }
  }
};

struct AdvantageVector {
  std::vector<double> values;
};

/// a_i = (r_i - mean) / (population_std + epsilon). A group whose rewards
/// are all equal carries no signal and yields exact zeros.
inline AdvantageVector group_advantages(std::span<const double> rewards, double epsilon) {
  if (rewards.size() < 2) throw GroupTooSmall("group_advantages needs n >= 2");
  const auto n = static_cast<double>(rewards.size());

  AdvantageVector out;
  out.values.assign(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(),
                  [first = rewards.front()](double r) { return r == first; })) {
    return out;
  }

  // Scaled by n: d_k = n r_k - sum, so integer rewards stay exact.
  double sum = 0.0;
  for (double r : rewards) sum += r;
  std::vector<double> d(rewards.size());
  double sq = 0.0;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    d[k] = n * rewards[k] - sum;
    sq += d[k] * d[k];
  }
  const double denom = std::sqrt(sq / n) + n * epsilon;

  for (std::size_t k = 0; k < rewards.size(); ++k) out.values[k] = d[k] / denom;
  return out;
}

inline AdvantageVector group_advantages(std::span<const double> rewards,
                                        const RlConfig& config = {}) {
  return group_advantages(rewards, config.advantage_epsilon);
}

/// Sum of all token losses divided by the total token count.
struct TokenMean {};

/// Per-sample token mean, then the mean over samples.
struct SampleMean {};

/// Per-sample token sum divided by a fixed length, then the mean over
/// samples (Dr. GRPO). `max_length` must cover the longest response.
struct DrGrpoConst {
  std::size_t max_length = 0;
};

using AggregationStrategy = std::variant<TokenMean, SampleMean, DrGrpoConst>;

inline double aggregate_loss(std::span<const std::vector<double>> token_losses,
                             const AggregationStrategy& strategy) {
  if (token_losses.empty()) throw InvalidGroup("no responses to aggregate");
  for (const auto& t : token_losses) {
    if (t.empty()) throw InvalidGroup("response with no tokens");
  }
  const auto n = static_cast<double>(token_losses.size());

  if (std::holds_alternative<TokenMean>(strategy)) {
    double sum = 0.0;
    std::size_t tokens = 0;
    for (const auto& t : token_losses) {
      for (double l : t) sum += l;
      tokens += t.size();
    }
    return sum / static_cast<double>(tokens);
  }

  if (std::holds_alternative<SampleMean>(strategy)) {
    double total = 0.0;
    for (const auto& t : token_losses) {
      double sum = 0.0;
      for (double l : t) sum += l;
      total += sum / static_cast<double>(t.size());
    }
    return total / n;
  }

  const std::size_t max_length = std::get<DrGrpoConst>(strategy).max_length;
  std::size_t longest = 0;
  for (const auto& t : token_losses) longest = std::max(longest, t.size());
  if (max_length == 0 || max_length < longest) {
    throw BadConstant("DrGrpoConst max_length " + std::to_string(max_length) +
                      " is shorter than the longest response (" + std::to_string(longest) +
                      " tokens)");
  }
  double total = 0.0;
  for (const auto& t : token_losses) {
    double sum = 0.0;
    for (double l : t) sum += l;
    total += sum / static_cast<double>(max_length);
  }
  return total / n;
}

inline double aggregate_loss(const RolloutGroup& group, const AggregationStrategy& strategy) {
  group.validate();
  return aggregate_loss(std::span<const std::vector<double>>(group.token_losses), strategy);
}

/// Per-token k3 estimator exp(d) - d - 1 with d = ref - policy. Never negative.
inline std::vector<double> kl_token_terms(std::span<const double> policy_logprobs,
                                          std::span<const double> ref_logprobs) {
  if (policy_logprobs.size() != ref_logprobs.size()) {
    throw LengthMismatch("policy and reference log-prob sequences differ in length (" +
                         std::to_string(policy_logprobs.size()) + " vs " +
                         std::to_string(ref_logprobs.size()) + ")");
  }
  if (policy_logprobs.empty()) throw LengthMismatch("log-prob sequences are empty");
  std::vector<double> out(policy_logprobs.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = ref_logprobs[k] - policy_logprobs[k];
    out[k] = std::max(0.0, std::expm1(d) - d);
  }
  return out;
}

/// Token-averaged k3 KL estimate for one sequence.
inline double kl_term(std::span<const double> policy_logprobs,
                      std::span<const double> ref_logprobs) {
  const auto terms = kl_token_terms(policy_logprobs, ref_logprobs);
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / static_cast<double>(terms.size());
}

/// Adds kl_coefficient * k3 to every token's surrogate loss and aggregates
/// the combined terms with one strategy, so surrogate and KL share the same
/// length normalization.
inline double regularized_loss(const RolloutGroup& group,
                               std::span<const std::vector<double>> policy_logprobs,
                               std::span<const std::vector<double>> ref_logprobs,
                               double kl_coefficient, const AggregationStrategy& strategy) {
  group.validate();
  if (policy_logprobs.size() != group.size() || ref_logprobs.size() != group.size()) {
    throw LengthMismatch("log-prob sequences must be given for every response");
  }
  std::vector<std::vector<double>> combined = group.token_losses;
  for (std::size_t k = 0; k < combined.size(); ++k) {
    const auto kl = kl_token_terms(policy_logprobs[k], ref_logprobs[k]);
    if (kl.size() != combined[k].size()) {
      throw LengthMismatch("response " + std::to_string(k) +
                           ": log-prob length differs from token-loss length");
    }
    for (std::size_t t = 0; t < kl.size(); ++t) combined[k][t] += kl_coefficient * kl[t];
  }
  return aggregate_loss(std::span<const std::vector<double>>(combined), strategy);
}

}  // namespace cybereval::grpo
