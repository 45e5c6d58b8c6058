#pragma once

// Model endpoints: an OpenAI-style chat-completions client with retry and
// an offline fixture reader.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cybereval/error.hpp"
#include "cybereval/extraction.hpp"
#include "cybereval/harness/config.hpp"
#include "cybereval/harness/prompts.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cybereval::harness {

struct CompletionRequest {
  std::string task_id;
  std::size_t trial = 0;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  double top_p = 1.0;
  std::int64_t seed = 0;
  std::size_t max_tokens = 4096;
};

class ModelEndpoint {
 public:
  virtual ~ModelEndpoint() = default;

  /// Returns the raw text of the first choice. Must be safe to call from
  /// several threads at once.
  virtual std::string complete_raw(const CompletionRequest& request) = 0;
};

/// Serves canned responses from `<root>/<task_id>/<trial>.txt`.
class FixtureEndpoint final : public ModelEndpoint {
 public:
  explicit FixtureEndpoint(std::filesystem::path root) : root_(std::move(root)) {}

  std::string complete_raw(const CompletionRequest& request) override {
    const auto path = root_ / request.task_id / (std::to_string(request.trial) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw FixtureMissing("no fixture for task '" + request.task_id + "' trial " +
                           std::to_string(request.trial) + " (" + path.string() + ")");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

/// Request body in the chat-completions wire format.
inline nlohmann::json completion_body(const CompletionRequest& request, const std::string& model) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"top_p", request.top_p},
          {"seed", request.seed},
          {"max_tokens", request.max_tokens}};
}

/// First choice's content. A separate `reasoning_content` field, as some
/// inference servers emit, is folded back in as a think block.
inline std::string completion_text(const nlohmann::json& body) {
  const auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty()) {
    throw EndpointError("completion response has no choices");
  }
  const auto& first = (*choices)[0];
  const auto message = first.find("message");
  if (message == first.end() || !message->is_object()) {
    throw EndpointError("completion response choice has no message");
  }
  std::string content;
  if (auto c = message->find("content"); c != message->end() && c->is_string()) {
    content = c->get<std::string>();
  } else if (c == message->end() || !c->is_null()) {
    throw EndpointError("completion response message has no string content");
  }
  if (auto r = message->find("reasoning_content"); r != message->end() && r->is_string() &&
                                                   !r->get<std::string>().empty()) {
    return std::string(kThinkOpen) + r->get<std::string>() + std::string(kThinkClose) + content;
  }
  return content;
}

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

inline ParsedUrl parse_url(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("endpoint url needs a scheme: '" + std::string(url) + "'");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme '" + std::string(scheme) + "'");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = std::string(url.substr(0, path_start));
  std::string path = path_start == std::string_view::npos ? std::string()
                                                          : std::string(url.substr(path_start));
  while (!path.empty() && path.back() == '/') path.pop_back();
  constexpr std::string_view suffix = "/chat/completions";
  if (path.size() < suffix.size() || path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) {
    path.append(suffix);
  }
  out.path = std::move(path);
  return out;
}

inline bool is_transient_status(int status) {
  return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

class HttpEndpoint final : public ModelEndpoint {
 public:
  explicit HttpEndpoint(EndpointSettings settings) : settings_(std::move(settings)) {
    url_ = parse_url(settings_.url);
    if (!settings_.api_key_env.empty()) {
      if (const char* key = std::getenv(settings_.api_key_env.c_str()); key && *key) api_key_ = key;
    }
  }

  std::string complete_raw(const CompletionRequest& request) override {
    const std::string body = completion_body(request, settings_.model).dump();
    std::string last_error;
    for (std::size_t attempt = 1; attempt <= settings_.retry.max_attempts; ++attempt) {
      if (attempt > 1) std::this_thread::sleep_for(settings_.retry.delay_before(attempt - 1));

      httplib::Client client(url_.scheme_host_port);
      client.set_connection_timeout(settings_.timeout);
      client.set_read_timeout(settings_.timeout);
      client.set_write_timeout(settings_.timeout);
      httplib::Headers headers;
      if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

      auto res = client.Post(url_.path, headers, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) {
        nlohmann::json parsed;
        try {
          parsed = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
          throw EndpointError(std::string("completion response is not JSON: ") + e.what());
        }
        return completion_text(parsed);
      }
      last_error = "HTTP " + std::to_string(res->status);
      if (!is_transient_status(res->status)) {
        throw EndpointError("task '" + request.task_id + "': " + last_error + ": " +
                            res->body.substr(0, 200));
      }
    }
    throw EndpointError("task '" + request.task_id + "': giving up after " +
                        std::to_string(settings_.retry.max_attempts) + " attempts (" +
                        last_error + ")");
  }

  const EndpointSettings& settings() const noexcept { return settings_; }

 private:
  EndpointSettings settings_;
  ParsedUrl url_;
  std::optional<std::string> api_key_;
};

inline constexpr std::string_view kFixturePrefix = "fixtures:";

/// "fixtures:PATH" selects fixture mode; anything else is an HTTP(S) URL.
inline std::unique_ptr<ModelEndpoint> make_endpoint(std::string_view spec,
                                                    EndpointSettings settings = {}) {
  if (spec.substr(0, kFixturePrefix.size()) == kFixturePrefix) {
    return std::make_unique<FixtureEndpoint>(std::string(spec.substr(kFixturePrefix.size())));
  }
  settings.url = std::string(spec);
  return std::make_unique<HttpEndpoint>(std::move(settings));
}

/// Issues one completion and splits its reasoning from the visible text.
inline ModelResponse complete(ModelEndpoint& endpoint, const std::string& task_id,
                              std::size_t trial, const std::vector<ChatMessage>& messages,
                              const TrialConfig& sampling, std::int64_t seed) {
  CompletionRequest request{task_id,         trial, messages, sampling.temperature,
                            sampling.top_p,  seed,  sampling.max_output_tokens};
  return split_reasoning(endpoint.complete_raw(request));
}

}  // namespace cybereval::harness
