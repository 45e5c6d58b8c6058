#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <algorithm>

#include "cybereval/error.hpp"
#include "cybereval/reward.hpp"
#include "json.hpp"

namespace cybereval::harness {

/// Sampling and orchestration settings for a multi-trial run. The defaults
/// are the reasoning-model settings: 5 trials, temperature 0.6, top-p 0.95.
struct TrialConfig {
  std::size_t trials = 5;
  double temperature = 0.6;
  double top_p = 0.95;
  std::int64_t seed_base = 1;
  std::size_t max_output_tokens = 4096;
  std::size_t concurrency = 8;

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (!(top_p >= 0.0 && top_p <= 1.0)) throw ConfigError("top_p must lie in [0, 1]");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
  }
};

/// Exponential backoff for transient failures (timeouts, 429, 5xx).
/// `max_attempts` counts the first request.
struct RetryPolicy {
  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds delay_before(std::size_t retry) const {
    double d = static_cast<double>(initial_backoff.count());
    for (std::size_t k = 1; k < retry; ++k) d *= multiplier;
    const auto capped = std::min(d, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
  }
};

inline constexpr const char* kDefaultApiKeyEnv = "CYBEREVAL_API_KEY";

struct EndpointSettings {
  std::string url;
  std::string model = "default";
  std::string api_key_env = kDefaultApiKeyEnv;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
};

struct HarnessConfig {
  TrialConfig trial;
  reward::FormatPolicy format;
  EndpointSettings endpoint;
  std::optional<std::string> system_prompt_file;
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

inline const nlohmann::json* section(const nlohmann::json& root, const char* name) {
  auto it = root.find(name);
  if (it == root.end() || it->is_null()) return nullptr;
  if (!it->is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  return &*it;
}

}  // namespace detail

inline HarnessConfig config_from_json(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(root, {"trial", "format_policy", "endpoint", "system_prompt_file"}, "");
  HarnessConfig cfg;

  if (const auto* t = detail::section(root, "trial")) {
    detail::reject_unknown(*t,
                           {"trials", "temperature", "top_p", "seed_base", "max_output_tokens",
                            "concurrency"},
                           "trial.");
    detail::read_field(*t, "trials", cfg.trial.trials);
    detail::read_field(*t, "temperature", cfg.trial.temperature);
    detail::read_field(*t, "top_p", cfg.trial.top_p);
    detail::read_field(*t, "seed_base", cfg.trial.seed_base);
    detail::read_field(*t, "max_output_tokens", cfg.trial.max_output_tokens);
    detail::read_field(*t, "concurrency", cfg.trial.concurrency);
  }
  if (const auto* f = detail::section(root, "format_policy")) {
    detail::reject_unknown(*f,
                           {"require_think_tags", "min_reasoning_chars", "max_repetition_ratio",
                            "penalty_weight"},
                           "format_policy.");
    detail::read_field(*f, "require_think_tags", cfg.format.require_think_tags);
    detail::read_field(*f, "min_reasoning_chars", cfg.format.min_reasoning_chars);
    detail::read_field(*f, "max_repetition_ratio", cfg.format.max_repetition_ratio);
    detail::read_field(*f, "penalty_weight", cfg.format.penalty_weight);
  }
  if (const auto* e = detail::section(root, "endpoint")) {
    detail::reject_unknown(*e,
                           {"url", "model", "api_key_env", "timeout_seconds", "max_attempts",
                            "initial_backoff_ms", "backoff_multiplier", "max_backoff_ms"},
                           "endpoint.");
    detail::read_field(*e, "url", cfg.endpoint.url);
    detail::read_field(*e, "model", cfg.endpoint.model);
    detail::read_field(*e, "api_key_env", cfg.endpoint.api_key_env);
    std::int64_t timeout = cfg.endpoint.timeout.count();
    std::int64_t initial = cfg.endpoint.retry.initial_backoff.count();
    std::int64_t max_backoff = cfg.endpoint.retry.max_backoff.count();
    detail::read_field(*e, "timeout_seconds", timeout);
    detail::read_field(*e, "max_attempts", cfg.endpoint.retry.max_attempts);
    detail::read_field(*e, "initial_backoff_ms", initial);
    detail::read_field(*e, "backoff_multiplier", cfg.endpoint.retry.multiplier);
    detail::read_field(*e, "max_backoff_ms", max_backoff);
    cfg.endpoint.timeout = std::chrono::seconds(timeout);
    cfg.endpoint.retry.initial_backoff = std::chrono::milliseconds(initial);
    cfg.endpoint.retry.max_backoff = std::chrono::milliseconds(max_backoff);
    if (cfg.endpoint.retry.max_attempts < 1) throw ConfigError("endpoint.max_attempts must be >= 1");
  }
  if (root.contains("system_prompt_file") && !root["system_prompt_file"].is_null()) {
    std::string path;
    detail::read_field(root, "system_prompt_file", path);
    cfg.system_prompt_file = path;
  }

  cfg.trial.validate();
  cfg.format.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const HarnessConfig& cfg) {
  nlohmann::json j;
  j["trial"] = {{"trials", cfg.trial.trials},
                {"temperature", cfg.trial.temperature},
                {"top_p", cfg.trial.top_p},
                {"seed_base", cfg.trial.seed_base},
                {"max_output_tokens", cfg.trial.max_output_tokens},
                {"concurrency", cfg.trial.concurrency}};
  j["format_policy"] = {{"require_think_tags", cfg.format.require_think_tags},
                        {"min_reasoning_chars", cfg.format.min_reasoning_chars},
                        {"max_repetition_ratio", cfg.format.max_repetition_ratio},
                        {"penalty_weight", cfg.format.penalty_weight}};
  j["endpoint"] = {{"url", cfg.endpoint.url},
                   {"model", cfg.endpoint.model},
                   {"api_key_env", cfg.endpoint.api_key_env},
                   {"timeout_seconds", cfg.endpoint.timeout.count()},
                   {"max_attempts", cfg.endpoint.retry.max_attempts},
                   {"initial_backoff_ms", cfg.endpoint.retry.initial_backoff.count()},
                   {"backoff_multiplier", cfg.endpoint.retry.multiplier},
                   {"max_backoff_ms", cfg.endpoint.retry.max_backoff.count()}};
  j["system_prompt_file"] =
      cfg.system_prompt_file ? nlohmann::json(*cfg.system_prompt_file) : nlohmann::json(nullptr);
  return j;
}

inline HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace cybereval::harness
