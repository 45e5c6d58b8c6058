// cybereval: batch evaluation and verifier command line.
//
//   cybereval run --benchmark <name> --dataset <path> --endpoint <url|fixtures:PATH>
//                 [--trials 5] [--temperature 0.6] [--top-p 0.95] [--seed 1]
//                 [--concurrency 8] [--config <file>] --out <dir>
//   cybereval report --in <dir> [--format markdown|csv]
//   cybereval cvss score <vector>
//   cybereval verify --kind <mcqa|rcm|vsp|ate> --response <file> --gold <value>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cybereval/cybereval.hpp"
#include "json.hpp"

namespace {

using namespace cybereval;

enum ExitCode { kOk = 0, kError = 1, kPartial = 2 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunArgs {
  std::string benchmark;
  std::string dataset;
  std::string endpoint;
  std::string out;
  std::string config;
  std::string system_prompt;
  std::string model;
  std::string format = "markdown";
  harness::TrialConfig trial;
};

int cmd_run(const RunArgs& args, const CLI::App& sub) {
  harness::HarnessConfig cfg;
  if (!args.config.empty()) cfg = harness::load_config(args.config);
  auto given = [&sub](const char* flag) { return sub.count(flag) > 0; };
  if (given("--trials")) cfg.trial.trials = args.trial.trials;
  if (given("--temperature")) cfg.trial.temperature = args.trial.temperature;
  if (given("--top-p")) cfg.trial.top_p = args.trial.top_p;
  if (given("--seed")) cfg.trial.seed_base = args.trial.seed_base;
  if (given("--concurrency")) cfg.trial.concurrency = args.trial.concurrency;
  if (given("--max-tokens")) cfg.trial.max_output_tokens = args.trial.max_output_tokens;
  if (given("--model")) cfg.endpoint.model = args.model;
  if (given("--system-prompt")) cfg.system_prompt_file = args.system_prompt;
  cfg.trial.validate();

  const auto format = harness::parse_report_format(args.format);
  if (!format) throw ConfigError("unknown report format '" + args.format + "'");

  const auto tasks = harness::load_dataset(args.dataset);
  auto endpoint = harness::make_endpoint(args.endpoint, cfg.endpoint);

  harness::RunOptions options;
  options.benchmark = args.benchmark;
  options.out_dir = args.out;
  if (cfg.system_prompt_file) options.system_prompt = read_file(*cfg.system_prompt_file);
  options.log = [](const std::string& line) { std::cerr << line << '\n'; };

  std::filesystem::create_directories(args.out);
  {
    std::ofstream cfg_out(std::filesystem::path(args.out) / (args.benchmark + ".config.json"));
    cfg_out << harness::config_to_json(cfg).dump(2) << '\n';
  }

  try {
    const auto report = harness::run_benchmark(tasks, *endpoint, cfg.trial, options);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    const std::vector<harness::BenchmarkReport> reports{report};
    const std::string doc = harness::emit_report(reports, *format);
    const auto ext = *format == harness::ReportFormat::Markdown ? ".report.md" : ".report.csv";
    std::ofstream(std::filesystem::path(args.out) / (args.benchmark + ext), std::ios::binary) << doc;
    std::cout << doc;
    return kOk;
  } catch (const harness::TrialAborted& e) {
    std::cerr << "error: " << e.what() << '\n'
              << "partial records written to " << args.out << '\n';
    return kPartial;
  }
}

int cmd_report(const std::string& dir, const std::string& format_name) {
  const auto format = harness::parse_report_format(format_name);
  if (!format) throw ConfigError("unknown report format '" + format_name + "'");
  const auto reports = harness::load_reports(dir);
  for (const auto& r : reports) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << r.benchmark << ": " << w << '\n';
  }
  std::cout << harness::emit_report(reports, *format);
  return kOk;
}

int cmd_cvss_score(const std::string& vector) {
  const auto v = cvss::parse_vector(vector);
  const auto score = cvss::base_score(v);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", score.value());
  std::cout << cvss::to_string(v) << '\t' << buf << '\n';
  return kOk;
}

int cmd_verify(const std::string& kind_name, const std::string& response_path,
               const std::string& gold_text, const std::string& config_path) {
  const auto kind = harness::parse_task_kind(kind_name);
  if (!kind) throw ConfigError("unknown kind '" + kind_name + "'");
  reward::FormatPolicy policy;
  if (!config_path.empty()) policy = harness::load_config(config_path).format;

  harness::BenchmarkTask task;
  task.id = "verify";
  task.kind = *kind;
  nlohmann::json task_json = {{"id", "verify"},
                              {"kind", std::string(harness::to_string(*kind))},
                              {"question", ""},
                              {"gold", gold_text}};
  if (*kind == harness::TaskKind::Mcqa) task_json["options"] = {"", "", "", ""};
  task = harness::parse_task(task_json, 0);

  const ModelResponse response = split_reasoning(read_file(response_path));
  const auto item = harness::score_item(task, response);

  bool correct = false;
  const auto answer = try_extract_answer(response, harness::answer_kind(*kind));
  if (answer) {
    switch (*kind) {
      case harness::TaskKind::Vsp: {
        const auto parsed = cvss::try_parse_vector(answer->vector_string());
        correct = parsed && *parsed == std::get<cvss::CvssVector>(task.gold);
        break;
      }
      case harness::TaskKind::Ate:
        correct = answer->technique_ids() == std::get<techniques::TechniqueSet>(task.gold);
        break;
      default:
        correct = item.score == 1.0;
        break;
    }
  }

  const auto verdict = reward::check_format(response, policy);
  const auto signal = reward::compute_reward(correct ? 1 : 0, verdict, policy);
  const nlohmann::json out = {
      {"kind", std::string(harness::to_string(*kind))},
      {"gold", harness::gold_to_string(task.gold)},
      {"extracted", item.extracted ? nlohmann::json(*item.extracted) : nlohmann::json(nullptr)},
      {"extraction_failed", item.extraction_failed},
      {"score", item.score},
      {"correct", correct},
      {"format",
       {{"tags_ok", verdict.tags_ok},
        {"length_ok", verdict.length_ok},
        {"repetition_ok", verdict.repetition_ok},
        {"passed", verdict.passed}}},
      {"reward", signal.total},
  };
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cybersecurity LLM evaluation harness and verifiable-reward toolkit", "cybereval"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a benchmark for several trials and score it");
  run_cmd->add_option("--benchmark", run.benchmark, "Benchmark name used in reports")->required();
  run_cmd->add_option("--dataset", run.dataset, "JSONL dataset")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--endpoint", run.endpoint, "Base URL or fixtures:PATH")->required();
  run_cmd->add_option("--out", run.out, "Output directory for records and reports")->required();
  run_cmd->add_option("--config", run.config, "JSON config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--trials", run.trial.trials, "Independent trials");
  run_cmd->add_option("--temperature", run.trial.temperature, "Sampling temperature");
  run_cmd->add_option("--top-p", run.trial.top_p, "Nucleus sampling threshold");
  run_cmd->add_option("--seed", run.trial.seed_base, "Seed of trial 0; trial t uses seed + t");
  run_cmd->add_option("--concurrency", run.trial.concurrency, "Maximum in-flight requests");
  run_cmd->add_option("--max-tokens", run.trial.max_output_tokens, "Maximum output tokens");
  run_cmd->add_option("--model", run.model, "Model name sent to the endpoint");
  run_cmd->add_option("--system-prompt", run.system_prompt, "File holding a system prompt")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--format", run.format, "Printed report format (markdown|csv)");

  std::string report_dir;
  std::string report_format = "markdown";
  auto* report_cmd = app.add_subcommand("report", "Recompute reports from a run directory");
  report_cmd->add_option("--in", report_dir, "Run output directory")->required();
  report_cmd->add_option("--format", report_format, "markdown|csv");

  std::string vector;
  auto* cvss_cmd = app.add_subcommand("cvss", "CVSS v3.1 utilities");
  cvss_cmd->require_subcommand(1);
  auto* cvss_score = cvss_cmd->add_subcommand("score", "Print the base score of a vector");
  cvss_score->add_option("vector", vector, "CVSS:3.1/... vector string")->required();

  std::string verify_kind, verify_response, verify_gold, verify_config;
  auto* verify_cmd = app.add_subcommand("verify", "Score one response and compute its reward");
  verify_cmd->add_option("--kind", verify_kind, "mcqa|rcm|vsp|ate|cwe_prediction")->required();
  verify_cmd->add_option("--response", verify_response, "File holding the model response")
      ->required()
      ->check(CLI::ExistingFile);
  verify_cmd->add_option("--gold", verify_gold, "Gold answer")->required();
  verify_cmd->add_option("--config", verify_config, "Config file with a format_policy section")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run, *run_cmd);
    if (*report_cmd) return cmd_report(report_dir, report_format);
    if (*cvss_score) return cmd_cvss_score(vector);
    if (*verify_cmd) return cmd_verify(verify_kind, verify_response, verify_gold, verify_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
