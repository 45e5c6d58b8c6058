#pragma once

// MITRE ATT&CK technique-ID normalization and corpus-level (micro) F1.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cybereval/text.hpp"

namespace cybereval::techniques {

/// Parses one token against the technique grammar `T` + 4-5 digits with an
/// optional `.<digits>` subtechnique suffix. Returns the parent ID in upper
/// case, or nullopt when the token does not match.
inline std::optional<std::string> parse_technique_id(std::string_view token) {
  token = text::trim(token);
  if (token.size() < 5 || text::to_upper(token.front()) != 'T') return std::nullopt;
  std::size_t i = 1;
  while (i < token.size() && text::is_digit(token[i])) ++i;
  const std::size_t digits = i - 1;
  if (digits < 4 || digits > 5) return std::nullopt;
  if (i < token.size()) {
    if (token[i] != '.') return std::nullopt;
    std::size_t j = i + 1;
    while (j < token.size() && text::is_digit(token[j])) ++j;
    if (j == i + 1 || j != token.size()) return std::nullopt;
  }
  std::string id = "T";
  id.append(token.substr(1, digits));
  return id;
}

/// A deduplicated set of parent technique IDs (no subtechnique suffixes).
class TechniqueSet {
 public:
  using const_iterator = std::set<std::string>::const_iterator;

  TechniqueSet() = default;

  /// Inserts a token if it parses as a technique ID; returns whether it did.
  bool insert(std::string_view token) {
    auto id = parse_technique_id(token);
    if (!id) return false;
    ids_.insert(std::move(*id));
    return true;
  }

  bool contains(std::string_view id) const {
    auto parsed = parse_technique_id(id);
    return parsed && ids_.count(*parsed) > 0;
  }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const_iterator begin() const noexcept { return ids_.begin(); }
  const_iterator end() const noexcept { return ids_.end(); }

  std::vector<std::string> to_vector() const { return {ids_.begin(), ids_.end()}; }

  /// "T1059, T1566" in ascending order.
  std::string join(std::string_view separator = ", ") const {
    std::string out;
    for (const auto& id : ids_) {
      if (!out.empty()) out.append(separator);
      out.append(id);
    }
    return out;
  }

  friend bool operator==(const TechniqueSet&, const TechniqueSet&) = default;

 private:
  std::set<std::string> ids_;
};

/// Strips subtechnique suffixes, upper-cases, dedupes and drops tokens that
/// are not technique IDs. `dropped` receives the number of rejected tokens.
inline TechniqueSet normalize(std::span<const std::string> ids, std::size_t& dropped) {
  TechniqueSet out;
  dropped = 0;
  for (const auto& id : ids) {
    if (!out.insert(id)) ++dropped;
  }
  return out;
}

inline TechniqueSet normalize(std::span<const std::string> ids) {
  std::size_t dropped = 0;
  return normalize(ids, dropped);
}

inline TechniqueSet normalize(std::initializer_list<std::string> ids) {
  std::vector<std::string> v(ids);
  return normalize(std::span<const std::string>(v));
}

/// Confusion counts accumulated across documents. Accumulators from
/// different workers merge by field-wise addition.
struct F1Accumulator {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  void add(const TechniqueSet& predicted, const TechniqueSet& gold) {
    for (const auto& id : predicted) {
      if (gold.contains(id)) {
        ++tp;
      } else {
        ++fp;
      }
    }
    for (const auto& id : gold) {
      if (!predicted.contains(id)) ++fn;
    }
  }

  F1Accumulator& operator+=(const F1Accumulator& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }

  friend F1Accumulator operator+(F1Accumulator a, const F1Accumulator& b) { return a += b; }
  friend bool operator==(const F1Accumulator&, const F1Accumulator&) = default;

  double precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }

  double recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }

  double f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

using PredictionPair = std::pair<TechniqueSet, TechniqueSet>;

/// Micro-F1 over (predicted, gold) pairs. Documents with empty gold sets
/// still contribute their false positives.
inline double micro_f1(std::span<const PredictionPair> pairs) {
  F1Accumulator acc;
  for (const auto& [predicted, gold] : pairs) acc.add(predicted, gold);
  return acc.f1();
}

}  // namespace cybereval::techniques
