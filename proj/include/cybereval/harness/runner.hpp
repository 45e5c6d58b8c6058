#pragma once

// Multi-trial benchmark orchestration.
//
// Each trial queries every task once with seed = seed_base + trial, scores
// the responses, and reduces them to one metric: mean accuracy, mean VSP
// score, or corpus micro-F1 for technique extraction. Records are sorted by
// task id and written as one JSONL file per trial, so aggregation depends
// only on the record set and never on completion order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cybereval/cvss.hpp"
#include "cybereval/error.hpp"
#include "cybereval/extraction.hpp"
#include "cybereval/harness/config.hpp"
#include "cybereval/harness/dataset.hpp"
#include "cybereval/harness/endpoint.hpp"
#include "cybereval/harness/prompts.hpp"
#include "cybereval/techniques.hpp"
#include "json.hpp"

namespace cybereval::harness {

/// Outcome of scoring one response. For technique extraction the confusion
/// counts feed the trial's micro-F1 and `score` is the item's own F1.
struct ItemScore {
  double score = 0.0;
  bool extraction_failed = false;
  std::optional<std::string> extracted;
  techniques::F1Accumulator counts;
};

inline ItemScore score_item(const BenchmarkTask& task, const ModelResponse& response) {
  ItemScore out;
  const auto answer = try_extract_answer(response, answer_kind(task.kind));
  if (answer) out.extracted = answer->canonical_line();

  switch (task.kind) {
    case TaskKind::Mcqa:
      out.extraction_failed = !answer;
      out.score = answer && answer->letter() == std::get<char>(task.gold) ? 1.0 : 0.0;
      break;
    case TaskKind::Rcm:
    case TaskKind::CwePrediction:
      out.extraction_failed = !answer;
      out.score = answer && answer->cwe() == std::get<CweId>(task.gold) ? 1.0 : 0.0;
      break;
    case TaskKind::Vsp: {
      const auto& gold = std::get<cvss::CvssVector>(task.gold);
      const auto predicted =
          answer ? cvss::try_parse_vector(answer->vector_string()) : std::nullopt;
      out.extraction_failed = !predicted;
      out.score = predicted ? cvss::score_difference(cvss::base_score(*predicted),
                                                     cvss::base_score(gold))
                            : 0.0;
      break;
    }
    case TaskKind::Ate: {
      out.extraction_failed = !answer;
      const techniques::TechniqueSet predicted =
          answer ? answer->technique_ids() : techniques::TechniqueSet{};
      out.counts.add(predicted, std::get<techniques::TechniqueSet>(task.gold));
      out.score = out.counts.f1();
      break;
    }
  }
  return out;
}

enum class RecordStatus { Scored, EndpointFailed };

struct EvalRecord {
  std::string task_id;
  std::size_t trial = 0;
  TaskKind kind = TaskKind::Mcqa;
  RecordStatus status = RecordStatus::Scored;
  std::int64_t seed = 0;
  std::string response;
  std::optional<std::string> extracted;
  bool extraction_failed = false;
  double score = 0.0;
  techniques::F1Accumulator counts;
  double latency_ms = 0.0;
  std::string error;
};

inline nlohmann::json record_to_json(const EvalRecord& r) {
  nlohmann::json j = {
      {"task_id", r.task_id},
      {"trial", r.trial},
      {"kind", std::string(to_string(r.kind))},
      {"status", r.status == RecordStatus::Scored ? "scored" : "endpoint_error"},
      {"seed", r.seed},
      {"response", r.response},
      {"extracted", r.extracted ? nlohmann::json(*r.extracted) : nlohmann::json(nullptr)},
      {"extraction_failed", r.extraction_failed},
      {"score", r.score},
      {"latency_ms", r.latency_ms},
  };
  if (r.kind == TaskKind::Ate) {
    j["tp"] = r.counts.tp;
    j["fp"] = r.counts.fp;
    j["fn"] = r.counts.fn;
  }
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  try {
    r.task_id = j.at("task_id").get<std::string>();
    r.trial = j.at("trial").get<std::size_t>();
    const auto kind = parse_task_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error("record has unknown kind");
    r.kind = *kind;
    r.status = j.at("status").get<std::string>() == "scored" ? RecordStatus::Scored
                                                             : RecordStatus::EndpointFailed;
    r.seed = j.at("seed").get<std::int64_t>();
    r.response = j.at("response").get<std::string>();
    if (!j.at("extracted").is_null()) r.extracted = j.at("extracted").get<std::string>();
    r.extraction_failed = j.at("extraction_failed").get<bool>();
    r.score = j.at("score").get<double>();
    r.latency_ms = j.value("latency_ms", 0.0);
    r.counts.tp = j.value("tp", std::uint64_t{0});
    r.counts.fp = j.value("fp", std::uint64_t{0});
    r.counts.fn = j.value("fn", std::uint64_t{0});
    r.error = j.value("error", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed eval record: ") + e.what());
  }
  return r;
}

/// Per-trial tallies. scored + endpoint_failures always equals the number
/// of tasks in the trial.
struct TrialSummary {
  std::size_t trial = 0;
  double metric = 0.0;
  std::size_t scored = 0;
  std::size_t endpoint_failures = 0;
  std::size_t extraction_failures = 0;
};

/// Reduces one trial's records to its metric.
inline TrialSummary summarize_trial(TaskKind kind, std::span<const EvalRecord> records,
                                    std::size_t trial) {
  TrialSummary s;
  s.trial = trial;
  techniques::F1Accumulator counts;
  double total = 0.0;
  for (const auto& r : records) {
    if (r.status == RecordStatus::EndpointFailed) {
      ++s.endpoint_failures;
      continue;
    }
    ++s.scored;
    if (r.extraction_failed) ++s.extraction_failures;
    total += r.score;
    counts += r.counts;
  }
  if (kind == TaskKind::Ate) {
    s.metric = counts.f1();
  } else {
    s.metric = s.scored == 0 ? 0.0 : total / static_cast<double>(s.scored);
  }
  return s;
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Arithmetic mean and sample (n - 1) standard deviation; a single value
/// has standard deviation 0.
inline MeanStd mean_and_sample_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return out;
}

struct BenchmarkReport {
  std::string benchmark;
  TaskKind kind = TaskKind::Mcqa;
  std::vector<double> per_trial;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t item_count = 0;
  std::size_t extraction_failures = 0;
  std::size_t endpoint_failures = 0;
  std::vector<std::string> warnings;
};

inline BenchmarkReport build_report(std::string benchmark, TaskKind kind, std::size_t item_count,
                                    std::span<const TrialSummary> trials) {
  BenchmarkReport report;
  report.benchmark = std::move(benchmark);
  report.kind = kind;
  report.item_count = item_count;
  for (const auto& t : trials) {
    report.per_trial.push_back(t.metric);
    report.extraction_failures += t.extraction_failures;
    report.endpoint_failures += t.endpoint_failures;
  }
  const auto ms = mean_and_sample_std(report.per_trial);
  report.mean = ms.mean;
  report.stddev = ms.stddev;
  if (report.per_trial.size() == 1) {
    report.warnings.push_back("only one trial: standard deviation reported as 0.0");
  }
  return report;
}

inline std::filesystem::path trial_records_path(const std::filesystem::path& dir,
                                                const std::string& benchmark, std::size_t trial) {
  return dir / (benchmark + ".trial" + std::to_string(trial) + ".jsonl");
}

inline std::filesystem::path manifest_path(const std::filesystem::path& dir,
                                           const std::string& benchmark) {
  return dir / (benchmark + ".manifest.json");
}

inline void write_records(const std::filesystem::path& path, std::span<const EvalRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write records to '" + path.string() + "'");
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read records from '" + path.string() + "'");
  std::vector<EvalRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

/// Thrown when a trial had endpoint failures. Records for every trial run
/// so far, including the failing one, are already on disk.
class TrialAborted : public EndpointError {
 public:
  TrialAborted(const std::string& what, TrialSummary summary, BenchmarkReport partial)
      : EndpointError(what), summary_(summary), partial_(std::move(partial)) {}

  const TrialSummary& summary() const noexcept { return summary_; }
  const BenchmarkReport& partial_report() const noexcept { return partial_; }

 private:
  TrialSummary summary_;
  BenchmarkReport partial_;
};

struct RunOptions {
  std::string benchmark = "benchmark";
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::string> system_prompt;
  std::function<void(const std::string&)> log;
};

/// Queries and scores every task once for `trial`. Requests run on up to
/// `concurrency` threads; after the first endpoint failure the remaining
/// unstarted tasks are marked failed without being sent.
inline std::vector<EvalRecord> run_trial(std::span<const BenchmarkTask> tasks,
                                         ModelEndpoint& endpoint, const TrialConfig& config,
                                         std::size_t trial,
                                         const std::optional<std::string>& system_prompt = {}) {
  const std::int64_t seed = config.seed_base + static_cast<std::int64_t>(trial);
  std::vector<EvalRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const BenchmarkTask& task = tasks[k];
      EvalRecord& rec = records[k];
      rec.task_id = task.id;
      rec.trial = trial;
      rec.kind = task.kind;
      rec.seed = seed;
      if (aborted.load()) {
        rec.status = RecordStatus::EndpointFailed;
        rec.error = "not sent: trial aborted after an endpoint failure";
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto messages = render_prompt(task, system_prompt);
        const ModelResponse response = complete(endpoint, task.id, trial, messages, config, seed);
        rec.latency_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        const ItemScore s = score_item(task, response);
        rec.response = response.raw_text;
        rec.extracted = s.extracted;
        rec.extraction_failed = s.extraction_failed;
        rec.score = s.score;
        rec.counts = s.counts;
      } catch (const EndpointError& e) {
        rec.status = RecordStatus::EndpointFailed;
        rec.error = e.what();
        aborted.store(true);
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.concurrency, tasks.size()));
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::sort(records.begin(), records.end(),
            [](const EvalRecord& a, const EvalRecord& b) { return a.task_id < b.task_id; });
  return records;
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& benchmark,
                           TaskKind kind, std::size_t item_count, const TrialConfig& config,
                           std::size_t completed_trials) {
  const nlohmann::json manifest = {
      {"benchmark", benchmark},
      {"kind", std::string(to_string(kind))},
      {"item_count", item_count},
      {"trials", config.trials},
      {"completed_trials", completed_trials},
      {"seed_base", config.seed_base},
      {"temperature", config.temperature},
      {"top_p", config.top_p},
      {"max_output_tokens", config.max_output_tokens},
  };
  std::ofstream out(manifest_path(dir, benchmark), std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << '\n';
}

inline BenchmarkReport run_benchmark(std::span<const BenchmarkTask> tasks, ModelEndpoint& endpoint,
                                     const TrialConfig& config, const RunOptions& options = {}) {
  config.validate();
  if (tasks.empty()) throw Error("dataset is empty");
  const TaskKind kind = tasks.front().kind;
  for (const auto& t : tasks) {
    if (t.kind != kind) {
      throw Error("dataset mixes task kinds ('" + std::string(to_string(kind)) + "' and '" +
                  std::string(to_string(t.kind)) + "')");
    }
  }
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);

  std::vector<TrialSummary> summaries;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const auto records = run_trial(tasks, endpoint, config, trial, options.system_prompt);
    if (options.out_dir) {
      write_records(trial_records_path(*options.out_dir, options.benchmark, trial), records);
    }
    const TrialSummary summary = summarize_trial(kind, records, trial);
    if (options.log) {
      options.log(options.benchmark + " trial " + std::to_string(trial) + ": metric " +
                  std::to_string(summary.metric) + ", " + std::to_string(summary.scored) +
                  " scored, " + std::to_string(summary.endpoint_failures) + " failed");
    }
    if (summary.endpoint_failures > 0) {
      if (options.out_dir) {
        write_manifest(*options.out_dir, options.benchmark, kind, tasks.size(), config, trial);
      }
      std::string first_error;
      for (const auto& r : records) {
        if (r.status == RecordStatus::EndpointFailed) {
          first_error = r.error;
          break;
        }
      }
      throw TrialAborted("trial " + std::to_string(trial) + " aborted: " +
                             std::to_string(summary.endpoint_failures) + " of " +
                             std::to_string(tasks.size()) + " requests failed (" + first_error +
                             ")",
                         summary, build_report(options.benchmark, kind, tasks.size(), summaries));
    }
    summaries.push_back(summary);
  }

  if (options.out_dir) {
    write_manifest(*options.out_dir, options.benchmark, kind, tasks.size(), config, config.trials);
  }
  return build_report(options.benchmark, kind, tasks.size(), summaries);
}

}  // namespace cybereval::harness
