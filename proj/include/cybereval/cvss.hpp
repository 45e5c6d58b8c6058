#pragma once

// CVSS v3.1 base metrics: vector parsing, the FIRST.org base-score
// equations, and the score-difference metric used for severity prediction.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cybereval/error.hpp"
#include "cybereval/extraction.hpp"
#include "cybereval/text.hpp"

namespace cybereval::cvss {

enum class AttackVector : std::uint8_t { Network, Adjacent, Local, Physical };
enum class AttackComplexity : std::uint8_t { Low, High };
enum class PrivilegesRequired : std::uint8_t { None, Low, High };
enum class UserInteraction : std::uint8_t { None, Required };
enum class Scope : std::uint8_t { Unchanged, Changed };
enum class Impact : std::uint8_t { None, Low, High };

struct CvssVector {
  AttackVector av = AttackVector::Network;
  AttackComplexity ac = AttackComplexity::Low;
  PrivilegesRequired pr = PrivilegesRequired::None;
  UserInteraction ui = UserInteraction::None;
  Scope s = Scope::Unchanged;
  Impact c = Impact::None;
  Impact i = Impact::None;
  Impact a = Impact::None;

  friend bool operator==(const CvssVector&, const CvssVector&) = default;
};

/// Number of distinct base vectors (4*2*3*2*2*3*3*3).
inline constexpr std::size_t kVectorCount = 2592;

/// A base score held as an integer number of tenths, so 9.8 is 98.
class CvssBaseScore {
 public:
  constexpr CvssBaseScore() = default;

  static constexpr CvssBaseScore from_tenths(int tenths) { return CvssBaseScore(tenths); }

  constexpr int tenths() const noexcept { return tenths_; }
  constexpr double value() const noexcept { return tenths_ / 10.0; }

  friend constexpr auto operator<=>(const CvssBaseScore&, const CvssBaseScore&) = default;

 private:
  constexpr explicit CvssBaseScore(int tenths) : tenths_(tenths) {}
  int tenths_ = 0;
};

namespace detail {

inline constexpr std::string_view kPrefix = "CVSS:3.1/";

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(char value, const std::array<char, N>& alphabet) {
  for (std::size_t k = 0; k < N; ++k) {
    if (alphabet[k] == value) return static_cast<Enum>(k);
  }
  return std::nullopt;
}

inline constexpr std::array<char, 4> kAv{'N', 'A', 'L', 'P'};
inline constexpr std::array<char, 2> kAc{'L', 'H'};
inline constexpr std::array<char, 3> kPr{'N', 'L', 'H'};
inline constexpr std::array<char, 2> kUi{'N', 'R'};
inline constexpr std::array<char, 2> kScope{'U', 'C'};
inline constexpr std::array<char, 3> kCia{'N', 'L', 'H'};

}  // namespace detail

/// Canonical "CVSS:3.1/AV:x/AC:x/PR:x/UI:x/S:x/C:x/I:x/A:x" form.
inline std::string to_string(const CvssVector& v) {
  std::string out(detail::kPrefix);
  auto put = [&out](std::string_view key, char value, bool last = false) {
    out.append(key);
    out.push_back(':');
    out.push_back(value);
    if (!last) out.push_back('/');
  };
  put("AV", detail::kAv[static_cast<int>(v.av)]);
  put("AC", detail::kAc[static_cast<int>(v.ac)]);
  put("PR", detail::kPr[static_cast<int>(v.pr)]);
  put("UI", detail::kUi[static_cast<int>(v.ui)]);
  put("S", detail::kScope[static_cast<int>(v.s)]);
  put("C", detail::kCia[static_cast<int>(v.c)]);
  put("I", detail::kCia[static_cast<int>(v.i)]);
  put("A", detail::kCia[static_cast<int>(v.a)], true);
  return out;
}

/// Parses a v3.1 vector. Metric order is free; keys are case-insensitive
/// and values are upper-cased before validation. Temporal and environmental
/// metrics are accepted and ignored. Throws MalformedVector.
inline CvssVector parse_vector(std::string_view text_in) {
  const std::string_view input = text::trim(text_in);
  if (!text::istarts_with(input, detail::kPrefix)) {
    throw MalformedVector("vector must start with 'CVSS:3.1/': '" + std::string(input) + "'");
  }

  std::optional<AttackVector> av;
  std::optional<AttackComplexity> ac;
  std::optional<PrivilegesRequired> pr;
  std::optional<UserInteraction> ui;
  std::optional<Scope> s;
  std::optional<Impact> c, i, a;

  auto set = [](auto& slot, auto parsed, std::string_view metric, std::string_view value) {
    if (slot) throw MalformedVector("metric " + std::string(metric) + " given twice");
    if (!parsed) {
      throw MalformedVector("illegal value '" + std::string(value) + "' for metric " +
                            std::string(metric));
    }
    slot = parsed;
  };

  std::string_view rest = input.substr(detail::kPrefix.size());
  while (true) {
    const std::size_t slash = rest.find('/');
    const std::string_view part = rest.substr(0, slash);
    const std::size_t colon = part.find(':');
    if (part.empty() || colon == std::string_view::npos || colon == 0) {
      throw MalformedVector("bad metric component '" + std::string(part) + "'");
    }
    const std::string key = text::upper(part.substr(0, colon));
    const std::string value = text::upper(part.substr(colon + 1));
    const char ch = value.size() == 1 ? value[0] : '\0';

    if (key == "AV") {
      set(av, detail::lookup<AttackVector>(ch, detail::kAv), key, value);
    } else if (key == "AC") {
      set(ac, detail::lookup<AttackComplexity>(ch, detail::kAc), key, value);
    } else if (key == "PR") {
      set(pr, detail::lookup<PrivilegesRequired>(ch, detail::kPr), key, value);
    } else if (key == "UI") {
      set(ui, detail::lookup<UserInteraction>(ch, detail::kUi), key, value);
    } else if (key == "S") {
      set(s, detail::lookup<Scope>(ch, detail::kScope), key, value);
    } else if (key == "C") {
      set(c, detail::lookup<Impact>(ch, detail::kCia), key, value);
    } else if (key == "I") {
      set(i, detail::lookup<Impact>(ch, detail::kCia), key, value);
    } else if (key == "A") {
      set(a, detail::lookup<Impact>(ch, detail::kCia), key, value);
    } else if (value.empty()) {
      throw MalformedVector("metric " + key + " has no value");
    }

    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
  }

  if (!av || !ac || !pr || !ui || !s || !c || !i || !a) {
    std::string missing;
    auto note = [&missing](bool present, std::string_view key) {
      if (present) return;
      if (!missing.empty()) missing += ", ";
      missing += key;
    };
    note(av.has_value(), "AV");
    note(ac.has_value(), "AC");
    note(pr.has_value(), "PR");
    note(ui.has_value(), "UI");
    note(s.has_value(), "S");
    note(c.has_value(), "C");
    note(i.has_value(), "I");
    note(a.has_value(), "A");
    throw MalformedVector("missing base metric(s): " + missing);
  }
  return CvssVector{*av, *ac, *pr, *ui, *s, *c, *i, *a};
}

inline std::optional<CvssVector> try_parse_vector(std::string_view text_in) {
  try {
    return parse_vector(text_in);
  } catch (const MalformedVector&) {
    return std::nullopt;
  }
}

/// The v3.1 Roundup: smallest one-decimal number >= input, computed on an
/// integer grid to avoid binary floating-point artefacts.
inline int roundup_tenths(double value) {
  const auto scaled = static_cast<long long>(std::llround(value * 100000.0));
  if (scaled % 10000 == 0) return static_cast<int>(scaled / 10000);
  return static_cast<int>(scaled / 10000 + 1);
}

inline CvssBaseScore base_score(const CvssVector& v) {
  static constexpr std::array<double, 4> av_w{0.85, 0.62, 0.55, 0.2};
  static constexpr std::array<double, 2> ac_w{0.77, 0.44};
  static constexpr std::array<double, 3> pr_unchanged{0.85, 0.62, 0.27};
  static constexpr std::array<double, 3> pr_changed{0.85, 0.68, 0.5};
  static constexpr std::array<double, 2> ui_w{0.85, 0.62};
  static constexpr std::array<double, 3> cia_w{0.0, 0.22, 0.56};

  const bool changed = v.s == Scope::Changed;
  const double iss = 1.0 - (1.0 - cia_w[static_cast<int>(v.c)]) *
                               (1.0 - cia_w[static_cast<int>(v.i)]) *
                               (1.0 - cia_w[static_cast<int>(v.a)]);
  const double impact = changed ? 7.52 * (iss - 0.029) - 3.25 * std::pow(iss - 0.02, 15)
                                : 6.42 * iss;
  if (impact <= 0.0) return CvssBaseScore::from_tenths(0);

  const double pr = (changed ? pr_changed : pr_unchanged)[static_cast<int>(v.pr)];
  const double exploitability = 8.22 * av_w[static_cast<int>(v.av)] *
                                ac_w[static_cast<int>(v.ac)] * pr *
                                ui_w[static_cast<int>(v.ui)];
  const double raw = changed ? std::min(1.08 * (impact + exploitability), 10.0)
                             : std::min(impact + exploitability, 10.0);
  return CvssBaseScore::from_tenths(roundup_tenths(raw));
}

/// Severity-prediction score between two base scores: 1 - |pred - gold| / 10.
inline double score_difference(CvssBaseScore predicted, CvssBaseScore gold) {
  const int diff = std::abs(predicted.tenths() - gold.tenths());
  return 1.0 - diff / 100.0;
}

/// Scores a model response against the gold vector. Responses whose
/// vector cannot be extracted or parsed score 0.0.
inline double vsp_score(const ModelResponse& prediction, const CvssVector& gold) {
  const auto answer = try_extract_answer(prediction, AnswerKind::CvssVectorString);
  if (!answer) return 0.0;
  const auto predicted = try_parse_vector(answer->vector_string());
  if (!predicted) return 0.0;
  return score_difference(base_score(*predicted), base_score(gold));
}

inline double vsp_score(std::string prediction_text, const CvssVector& gold) {
  return vsp_score(split_reasoning(std::move(prediction_text)), gold);
}

/// Every base vector in the metric order AV, AC, PR, UI, S, C, I, A with
/// the last metric varying fastest.
template <typename Fn>
void for_each_vector(Fn&& fn) {
  for (int av = 0; av < 4; ++av)
    for (int ac = 0; ac < 2; ++ac)
      for (int pr = 0; pr < 3; ++pr)
        for (int ui = 0; ui < 2; ++ui)
          for (int s = 0; s < 2; ++s)
            for (int c = 0; c < 3; ++c)
              for (int i = 0; i < 3; ++i)
                for (int a = 0; a < 3; ++a)
                  fn(CvssVector{static_cast<AttackVector>(av), static_cast<AttackComplexity>(ac),
                                static_cast<PrivilegesRequired>(pr),
                                static_cast<UserInteraction>(ui), static_cast<Scope>(s),
                                static_cast<Impact>(c), static_cast<Impact>(i),
                                static_cast<Impact>(a)});
}

}  // namespace cybereval::cvss
