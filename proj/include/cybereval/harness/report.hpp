#pragma once

// Markdown / CSV summaries of benchmark reports, and recomputation of
// reports from a run directory's persisted records.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cybereval/error.hpp"
#include "cybereval/harness/runner.hpp"
#include "json.hpp"

namespace cybereval::harness {

enum class ReportFormat { Markdown, Csv };

inline std::optional<ReportFormat> parse_report_format(std::string_view name) {
  const std::string n = text::lower(name);
  if (n == "markdown" || n == "md") return ReportFormat::Markdown;
  if (n == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

/// "0.650±0.050": three decimals on both sides.
inline std::string format_mean_std(double mean, double stddev) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f\xC2\xB1%.3f", mean, stddev);
  return buf;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

}  // namespace detail

/// Columns: benchmark, mean±std, trials, failures (extraction failures over
/// all trials). Rows follow input order; output is byte-stable.
inline std::string emit_report(std::span<const BenchmarkReport> reports, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Markdown) {
    out += "| benchmark | mean\xC2\xB1std | trials | failures |\n";
    out += "|---|---|---|---|\n";
    for (const auto& r : reports) {
      out += "| " + detail::md_cell(r.benchmark) + " | " + format_mean_std(r.mean, r.stddev) +
             " | " + std::to_string(r.per_trial.size()) + " | " +
             std::to_string(r.extraction_failures) + " |\n";
    }
  } else {
    out += "benchmark,mean\xC2\xB1std,trials,failures\n";
    for (const auto& r : reports) {
      out += detail::csv_field(r.benchmark) + "," + format_mean_std(r.mean, r.stddev) + "," +
             std::to_string(r.per_trial.size()) + "," + std::to_string(r.extraction_failures) +
             "\n";
    }
  }
  return out;
}

/// Rebuilds the report for one benchmark from its manifest and trial files.
/// Only completed trials are included.
inline BenchmarkReport load_report(const std::filesystem::path& dir, const std::string& benchmark) {
  const auto mpath = manifest_path(dir, benchmark);
  std::ifstream in(mpath);
  if (!in) throw Error("cannot read manifest '" + mpath.string() + "'");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("manifest '" + mpath.string() + "' is not valid JSON: " + e.what());
  }
  const auto kind = parse_task_kind(manifest.at("kind").get<std::string>());
  if (!kind) throw Error("manifest '" + mpath.string() + "' has an unknown kind");
  const auto item_count = manifest.at("item_count").get<std::size_t>();
  const auto completed = manifest.at("completed_trials").get<std::size_t>();

  std::vector<TrialSummary> summaries;
  for (std::size_t t = 0; t < completed; ++t) {
    const auto records = read_records(trial_records_path(dir, benchmark, t));
    summaries.push_back(summarize_trial(*kind, records, t));
  }
  return build_report(benchmark, *kind, item_count, summaries);
}

/// Every benchmark in `dir`, ordered by benchmark name.
inline std::vector<BenchmarkReport> load_reports(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("run directory '" + dir.string() + "' does not exist");
  }
  constexpr std::string_view suffix = ".manifest.json";
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() > suffix.size() &&
        file.compare(file.size() - suffix.size(), suffix.size(), suffix) == 0) {
      names.push_back(file.substr(0, file.size() - suffix.size()));
    }
  }
  std::sort(names.begin(), names.end());
  std::vector<BenchmarkReport> reports;
  for (const auto& name : names) reports.push_back(load_report(dir, name));
  return reports;
}

}  // namespace cybereval::harness
