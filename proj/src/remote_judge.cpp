#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

#include "sqlsel/error.hpp"
#include "sqlsel/judge.hpp"

namespace sqlsel {

using json = nlohmann::json;

RemoteJudge::RemoteJudge(RemoteJudgeConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.base_url.find("://");
  if (config_.base_url.empty() || scheme_end == std::string::npos) {
    throw ConfigError("judge URL must look like http://host[:port][/path], got '" +
                      config_.base_url + "'");
  }
  if (config_.model.empty()) throw ConfigError("remote judge needs a model name");
  if (config_.retries < 0) throw ConfigError("retry count must be non-negative");
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) {
    path_prefix_ = config_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

std::string RemoteJudge::complete(const std::string& prompt) const {
  json body = {
      {"model", config_.model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
      {"n", 1},
      {"max_tokens", config_.max_tokens},
  };
  const std::string payload = body.dump();
  const std::string path = path_prefix_ + "/chat/completions";

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_token.empty()) headers.emplace("Authorization", "Bearer " + config_.api_token);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << std::min(attempt, 6)));
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("judge endpoint returned HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 200));
    }
    try {
      const json reply = json::parse(res->body);
      const json& content = reply.at("choices").at(0).at("message").at("content");
      return content.is_string() ? content.get<std::string>() : std::string();
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw TransportError("judge endpoint unreachable after " + std::to_string(config_.retries + 1) +
                       " attempts (" + last_error + ")");
}

JudgmentOutcome RemoteJudge::judge(const JudgmentRequest& req) {
  JudgmentOutcome out;
  out.raw_response = complete(render_prompt(req));
  const ParsedJudgment parsed = parse_judgment(out.raw_response);
  out.winner = parsed.winner;
  out.reasoning_text = parsed.reasoning;
  out.format_ok = parsed.format_ok;
  out.backend_tag = tag();
  return out;
}

}  // namespace sqlsel
