#pragma once

// Reasoning/answer separation and last-line answer extraction.
//
// A response is split at its first <think>...</think> block. Answers are
// only ever read from the visible remainder, and only from its last
// non-empty line after Markdown decoration has been removed.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cybereval/error.hpp"
#include "cybereval/techniques.hpp"
#include "cybereval/text.hpp"

namespace cybereval {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";

/// Shape of the think tags found in a raw response.
enum class ThinkTags {
  Absent,      // no tags at all
  WellFormed,  // exactly one <think>...</think> block
  Unclosed,    // <think> without a matching </think>
  Unopened,    // </think> without a preceding <think>
  Multiple,    // more than one block; only the first is treated as reasoning
};

struct ModelResponse {
  std::string raw_text;
  std::optional<std::string> reasoning;
  std::string visible;
  ThinkTags tags = ThinkTags::Absent;

  bool tags_well_formed() const noexcept { return tags == ThinkTags::WellFormed; }
};

inline ModelResponse split_reasoning(std::string raw) {
  ModelResponse out;
  const std::string_view view(raw);
  const std::size_t open = view.find(kThinkOpen);
  const std::size_t close =
      open == std::string_view::npos ? view.find(kThinkClose)
                                     : view.find(kThinkClose, open + kThinkOpen.size());

  if (open == std::string_view::npos || close == std::string_view::npos) {
    if (open != std::string_view::npos) {
      out.tags = ThinkTags::Unclosed;
    } else if (close != std::string_view::npos) {
      out.tags = ThinkTags::Unopened;
    }
    out.visible = raw;
    out.raw_text = std::move(raw);
    return out;
  }

  const std::size_t body = open + kThinkOpen.size();
  const std::string_view after = view.substr(close + kThinkClose.size());
  out.reasoning = std::string(view.substr(body, close - body));

  std::string remainder(view.substr(0, open));
  remainder.append(after);
  out.visible = std::string(text::trim(remainder));

  const bool more_tags = after.find(kThinkOpen) != std::string_view::npos ||
                         after.find(kThinkClose) != std::string_view::npos ||
                         view.substr(0, open).find(kThinkClose) != std::string_view::npos;
  out.tags = more_tags ? ThinkTags::Multiple : ThinkTags::WellFormed;
  out.raw_text = std::move(raw);
  return out;
}

enum class AnswerKind { McqaLetter, CweId, CvssVectorString, TechniqueIdSet };

inline std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::McqaLetter: return "mcqa";
    case AnswerKind::CweId: return "cwe";
    case AnswerKind::CvssVectorString: return "vsp";
    case AnswerKind::TechniqueIdSet: return "ate";
  }
  return "unknown";
}

/// "CWE-<digits>" with leading zeros removed.
struct CweId {
  unsigned long number = 0;

  std::string to_string() const { return "CWE-" + std::to_string(number); }
  friend bool operator==(const CweId&, const CweId&) = default;
};

/// Parses "CWE-79" (case-insensitive keyword). Rejects anything else.
inline std::optional<CweId> parse_cwe_id(std::string_view s) {
  s = text::trim(s);
  if (!text::istarts_with(s, "CWE-")) return std::nullopt;
  s.remove_prefix(4);
  if (s.empty() || s.size() > 9) return std::nullopt;
  unsigned long n = 0;
  for (char c : s) {
    if (!text::is_digit(c)) return std::nullopt;
    n = n * 10 + static_cast<unsigned long>(c - '0');
  }
  return CweId{n};
}

struct ExtractedAnswer {
  using Value = std::variant<char, CweId, std::string, techniques::TechniqueSet>;

  AnswerKind kind = AnswerKind::McqaLetter;
  Value value;

  char letter() const { return std::get<char>(value); }
  const CweId& cwe() const { return std::get<CweId>(value); }
  const std::string& vector_string() const { return std::get<std::string>(value); }
  const techniques::TechniqueSet& technique_ids() const {
    return std::get<techniques::TechniqueSet>(value);
  }

  /// The answer rendered as the line the prompts ask for.
  std::string canonical_line() const {
    switch (kind) {
      case AnswerKind::McqaLetter: return std::string("Answer: ") + letter();
      case AnswerKind::CweId: return "CWE ID: " + cwe().to_string();
      case AnswerKind::CvssVectorString: return vector_string();
      case AnswerKind::TechniqueIdSet: return "Answer: " + technique_ids().join(", ");
    }
    return {};
  }

  friend bool operator==(const ExtractedAnswer&, const ExtractedAnswer&) = default;
};

namespace detail {

inline bool is_fence(std::string_view line) {
  line = text::trim(line);
  return line.size() >= 3 && (line.substr(0, 3) == "```" || line.substr(0, 3) == "~~~");
}

// Removes Markdown emphasis/code characters, then leading block markers.
inline std::string clean_line(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (char c : line) {
    if (c == '*' || c == '_' || c == '`') continue;
    out.push_back(c);
  }
  std::string_view v = text::trim(out);
  while (!v.empty() && (v.front() == '#' || v.front() == '>')) {
    v.remove_prefix(1);
    v = text::trim(v);
  }
  return std::string(v);
}

// Position just past "<keyword> :" (rightmost occurrence), or npos.
inline std::size_t after_keyword(std::string_view line, std::string_view keyword) {
  std::string_view hay = line;
  while (true) {
    const std::size_t at = text::rfind_icase(hay, keyword);
    if (at == std::string_view::npos) return std::string_view::npos;
    const bool word_start = at == 0 || !text::is_alnum(line[at - 1]);
    std::size_t i = at + keyword.size();
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (word_start && i < line.size() && line[i] == ':') return i + 1;
    hay = hay.substr(0, at);
  }
}

inline std::size_t skip_blanks(std::string_view line, std::size_t i) {
  while (i < line.size() && text::is_space(line[i])) ++i;
  return i;
}

inline std::optional<ExtractedAnswer> match_letter(std::string_view line) {
  std::size_t i = after_keyword(line, "answer");
  if (i == std::string_view::npos) return std::nullopt;
  i = skip_blanks(line, i);
  if (i < line.size() && (line[i] == '(' || line[i] == '[')) i = skip_blanks(line, i + 1);
  if (i >= line.size()) return std::nullopt;
  const char c = line[i];
  if (c < 'A' || c > 'D') return std::nullopt;
  if (i + 1 < line.size() && text::is_alnum(line[i + 1])) return std::nullopt;
  return ExtractedAnswer{AnswerKind::McqaLetter, c};
}

inline std::optional<ExtractedAnswer> match_cwe(std::string_view line) {
  std::size_t i = after_keyword(line, "cwe id");
  if (i == std::string_view::npos) i = after_keyword(line, "answer");
  if (i == std::string_view::npos) return std::nullopt;
  i = skip_blanks(line, i);
  std::size_t j = i;
  while (j < line.size() && (text::is_alnum(line[j]) || line[j] == '-')) ++j;
  auto id = parse_cwe_id(line.substr(i, j - i));
  if (!id) return std::nullopt;
  return ExtractedAnswer{AnswerKind::CweId, *id};
}

inline std::optional<ExtractedAnswer> match_vector(std::string_view line) {
  constexpr std::string_view prefix = "CVSS:3.1/";
  for (std::size_t at = text::rfind_icase(line, prefix); at != std::string_view::npos;
       at = at == 0 ? std::string_view::npos : text::rfind_icase(line.substr(0, at), prefix)) {
    if (at > 0 && text::is_alnum(line[at - 1])) continue;
    std::size_t end = at;
    while (end < line.size() && !text::is_space(line[end])) ++end;
    std::string_view token = line.substr(at, end - at);
    while (!token.empty() && (token.back() == '.' || token.back() == ',' || token.back() == ';' ||
                              token.back() == ')' || token.back() == ']' ||
                              token.back() == '"' || token.back() == '\'')) {
      token.remove_suffix(1);
    }
    if (token.size() > prefix.size()) {
      return ExtractedAnswer{AnswerKind::CvssVectorString, std::string(token)};
    }
  }
  return std::nullopt;
}

inline std::optional<ExtractedAnswer> match_techniques(std::string_view line) {
  const std::size_t i = after_keyword(line, "answer");
  if (i == std::string_view::npos) return std::nullopt;
  techniques::TechniqueSet ids;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) ids.insert(token);
    token.clear();
  };
  for (char c : line.substr(i)) {
    if (c == ',' || c == ';' || text::is_space(c) || c == '[' || c == ']' || c == '(' ||
        c == ')' || c == '"' || c == '\'') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return ExtractedAnswer{AnswerKind::TechniqueIdSet, std::move(ids)};
}

}  // namespace detail

/// Last line of `visible` that still has content once fences and Markdown
/// emphasis are removed. Empty when there is none.
inline std::string last_answer_line(std::string_view visible) {
  const auto all = text::lines(visible);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    if (detail::is_fence(*it)) continue;
    std::string cleaned = detail::clean_line(*it);
    if (!cleaned.empty()) return cleaned;
  }
  return {};
}

/// Extracts the answer without throwing; nullopt means unscorable.
inline std::optional<ExtractedAnswer> try_extract_answer(const ModelResponse& response,
                                                         AnswerKind kind) {
  const std::string line = last_answer_line(response.visible);
  if (line.empty()) return std::nullopt;
  switch (kind) {
    case AnswerKind::McqaLetter: return detail::match_letter(line);
    case AnswerKind::CweId: return detail::match_cwe(line);
    case AnswerKind::CvssVectorString: return detail::match_vector(line);
    case AnswerKind::TechniqueIdSet: return detail::match_techniques(line);
  }
  return std::nullopt;
}

inline ExtractedAnswer extract_answer(const ModelResponse& response, AnswerKind kind) {
  if (auto answer = try_extract_answer(response, kind)) return std::move(*answer);
  throw ExtractionFailed(std::string("no ") + std::string(to_string(kind)) +
                         " answer on the last non-empty line");
}

}  // namespace cybereval
