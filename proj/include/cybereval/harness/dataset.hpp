#pragma once

// JSON-lines benchmark datasets.
//
// One object per line:
//   {"id": "...", "kind": "mcqa|rcm|vsp|ate|cwe_prediction",
//    "question": "...", "options": ["..", "..", "..", ".."],   (mcqa only)
//    "platform": "enterprise", "reference_ids": ["T1001", ...], (ate only)
//    "gold": "B" | "CWE-79" | "CVSS:3.1/..." | ["T1059", ...]}
// Blank lines are skipped.

#include <array>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cybereval/cvss.hpp"
#include "cybereval/error.hpp"
#include "cybereval/extraction.hpp"
#include "cybereval/techniques.hpp"
#include "json.hpp"

namespace cybereval::harness {

enum class TaskKind { Mcqa, Rcm, Vsp, Ate, CwePrediction };

inline std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Mcqa: return "mcqa";
    case TaskKind::Rcm: return "rcm";
    case TaskKind::Vsp: return "vsp";
    case TaskKind::Ate: return "ate";
    case TaskKind::CwePrediction: return "cwe_prediction";
  }
  return "unknown";
}

inline std::optional<TaskKind> parse_task_kind(std::string_view name) {
  const std::string n = text::lower(text::trim(name));
  if (n == "mcqa") return TaskKind::Mcqa;
  if (n == "rcm") return TaskKind::Rcm;
  if (n == "vsp") return TaskKind::Vsp;
  if (n == "ate") return TaskKind::Ate;
  if (n == "cwe_prediction" || n == "cwe-prediction" || n == "cweprediction" || n == "cwe") {
    return TaskKind::CwePrediction;
  }
  return std::nullopt;
}

inline AnswerKind answer_kind(TaskKind kind) {
  switch (kind) {
    case TaskKind::Mcqa: return AnswerKind::McqaLetter;
    case TaskKind::Rcm:
    case TaskKind::CwePrediction: return AnswerKind::CweId;
    case TaskKind::Vsp: return AnswerKind::CvssVectorString;
    case TaskKind::Ate: return AnswerKind::TechniqueIdSet;
  }
  return AnswerKind::McqaLetter;
}

using Gold = std::variant<char, CweId, cvss::CvssVector, techniques::TechniqueSet>;

struct BenchmarkTask {
  std::string id;
  TaskKind kind = TaskKind::Mcqa;
  std::string question;
  std::optional<std::array<std::string, 4>> options;
  std::optional<std::string> platform;
  std::optional<std::vector<std::string>> reference_ids;
  Gold gold;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* field,
                                     std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw SchemaError(line, std::string("missing field '") + field + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* field,
                                  std::size_t line) {
  const auto& v = require(obj, field, line);
  if (!v.is_string()) throw SchemaError(line, std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<std::string> string_list(const nlohmann::json& v, const char* field,
                                            std::size_t line) {
  if (!v.is_array()) throw SchemaError(line, std::string("field '") + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) {
      throw SchemaError(line, std::string("field '") + field + "' must hold strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline Gold parse_gold(TaskKind kind, const nlohmann::json& v, std::size_t line) {
  switch (kind) {
    case TaskKind::Mcqa: {
      if (!v.is_string()) throw SchemaError(line, "mcqa gold must be a letter string");
      const std::string g = text::upper(text::trim(v.get<std::string>()));
      if (g.size() != 1 || g[0] < 'A' || g[0] > 'D') {
        throw SchemaError(line, "mcqa gold must be one of A, B, C, D");
      }
      return g[0];
    }
    case TaskKind::Rcm:
    case TaskKind::CwePrediction: {
      if (!v.is_string()) throw SchemaError(line, "cwe gold must be a string like 'CWE-79'");
      auto id = parse_cwe_id(v.get<std::string>());
      if (!id) throw SchemaError(line, "cwe gold must look like 'CWE-<digits>'");
      return *id;
    }
    case TaskKind::Vsp: {
      if (!v.is_string()) throw SchemaError(line, "vsp gold must be a CVSS v3.1 vector string");
      try {
        return cvss::parse_vector(v.get<std::string>());
      } catch (const MalformedVector& e) {
        throw SchemaError(line, std::string("vsp gold: ") + e.what());
      }
    }
    case TaskKind::Ate: {
      std::vector<std::string> ids;
      if (v.is_string()) {
        std::string token;
        for (char c : v.get<std::string>()) {
          if (c == ',' || text::is_space(c)) {
            if (!token.empty()) ids.push_back(token);
            token.clear();
          } else {
            token.push_back(c);
          }
        }
        if (!token.empty()) ids.push_back(token);
      } else {
        ids = string_list(v, "gold", line);
      }
      std::size_t dropped = 0;
      auto set = techniques::normalize(ids, dropped);
      if (dropped > 0) throw SchemaError(line, "ate gold holds tokens that are not technique IDs");
      return set;
    }
  }
  throw SchemaError(line, "unknown task kind");
}

}  // namespace detail

/// Validates one decoded dataset object. `line` is used in error messages.
inline BenchmarkTask parse_task(const nlohmann::json& obj, std::size_t line) {
  if (!obj.is_object()) throw SchemaError(line, "expected a JSON object");
  BenchmarkTask task;
  task.id = detail::require_string(obj, "id", line);
  if (task.id.empty()) throw SchemaError(line, "field 'id' must not be empty");

  const std::string kind_name = detail::require_string(obj, "kind", line);
  auto kind = parse_task_kind(kind_name);
  if (!kind) throw SchemaError(line, "unknown kind '" + kind_name + "'");
  task.kind = *kind;
  task.question = detail::require_string(obj, "question", line);

  const bool has_options = obj.contains("options") && !obj["options"].is_null();
  if (task.kind == TaskKind::Mcqa) {
    if (!has_options) throw SchemaError(line, "mcqa task needs 'options'");
    std::array<std::string, 4> opts;
    const auto& o = obj["options"];
    if (o.is_array()) {
      auto list = detail::string_list(o, "options", line);
      if (list.size() != 4) throw SchemaError(line, "'options' must hold exactly 4 strings");
      std::copy(list.begin(), list.end(), opts.begin());
    } else if (o.is_object()) {
      for (int k = 0; k < 4; ++k) {
        const std::string label(1, static_cast<char>('A' + k));
        auto it = o.find(label);
        if (it == o.end() || !it->is_string()) {
          throw SchemaError(line, "'options' object must map A-D to strings");
        }
        opts[k] = it->get<std::string>();
      }
      if (o.size() != 4) throw SchemaError(line, "'options' object must have exactly A-D");
    } else {
      throw SchemaError(line, "'options' must be an array or an object");
    }
    task.options = std::move(opts);
  } else if (has_options) {
    throw SchemaError(line, "'options' is only allowed on mcqa tasks");
  }

  if (obj.contains("platform") && !obj["platform"].is_null()) {
    if (task.kind != TaskKind::Ate) throw SchemaError(line, "'platform' is only allowed on ate tasks");
    task.platform = detail::require_string(obj, "platform", line);
  }
  if (obj.contains("reference_ids") && !obj["reference_ids"].is_null()) {
    if (task.kind != TaskKind::Ate) {
      throw SchemaError(line, "'reference_ids' is only allowed on ate tasks");
    }
    task.reference_ids = detail::string_list(obj["reference_ids"], "reference_ids", line);
  }

  task.gold = detail::parse_gold(task.kind, detail::require(obj, "gold", line), line);
  return task;
}

inline std::vector<BenchmarkTask> load_dataset(std::istream& in) {
  std::vector<BenchmarkTask> tasks;
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(number, std::string("invalid JSON: ") + e.what());
    }
    BenchmarkTask task = parse_task(obj, number);
    if (!seen.insert(task.id).second) throw DuplicateId(number, task.id);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

inline std::vector<BenchmarkTask> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(0, "cannot open dataset '" + path + "'");
  return load_dataset(in);
}

/// Gold answer in the form used on the verify command line and in records.
inline std::string gold_to_string(const Gold& gold) {
  struct Visitor {
    std::string operator()(char c) const { return std::string(1, c); }
    std::string operator()(const CweId& id) const { return id.to_string(); }
    std::string operator()(const cvss::CvssVector& v) const { return cvss::to_string(v); }
    std::string operator()(const techniques::TechniqueSet& s) const { return s.join(", "); }
  };
  return std::visit(Visitor{}, gold);
}

}  // namespace cybereval::harness
