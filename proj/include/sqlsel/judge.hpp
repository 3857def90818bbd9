#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "sqlsel/schema_linker.hpp"
#include "sqlsel/sql_exec.hpp"

namespace sqlsel {

enum class PromptTemplate { pjudge, rjudge };

std::string_view to_string(PromptTemplate t) noexcept;

struct JudgedSide {
  std::size_t candidate_index = 0;
  std::string sql;
  OutcomePtr outcome;
};

// One pairwise comparison. `gold` is read only by the oracle backends and
// never reaches a prompt.
struct JudgmentRequest {
  std::string question_id;
  std::string question;
  std::string evidence;
  SchemaUnion schema_union;
  JudgedSide side_a;
  JudgedSide side_b;
  PromptTemplate prompt_template = PromptTemplate::rjudge;
  OutcomePtr gold;
};

enum class Verdict { A, B, parse_failure };

std::string_view to_string(Verdict v) noexcept;
Verdict flip(Verdict v) noexcept;

struct ParsedJudgment {
  Verdict winner = Verdict::parse_failure;
  std::optional<std::string> reasoning;
  // Whole output is exactly <think>..</think><answer>A|B</answer>, modulo
  // surrounding whitespace.
  bool format_ok = false;
};

struct JudgmentOutcome {
  Verdict winner = Verdict::parse_failure;
  std::string raw_response;
  std::optional<std::string> reasoning_text;
  bool format_ok = false;
  std::chrono::milliseconds latency{0};
  std::string backend_tag;
};

// Fills the judge template. Byte-stable for a given request.
std::string render_prompt(const JudgmentRequest& req);

// Winner comes from the last <answer> span; depends only on `raw`.
ParsedJudgment parse_judgment(std::string_view raw);

JudgmentRequest swap_sides(JudgmentRequest req);

// Pairwise judge backend. Implementations must be safe to call concurrently.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual JudgmentOutcome judge(const JudgmentRequest& req) = 0;
  virtual std::string tag() const = 0;
};

// Calls `judge` and stamps the wall-clock latency.
JudgmentOutcome judge_pair(Judge& judge, const JudgmentRequest& req);

// Picks the side whose result matches the gold result. When both or neither
// match, a fair coin from the stream keyed by (question, ordered pair) decides.
class OracleJudge : public Judge {
 public:
  explicit OracleJudge(std::uint64_t seed) : seed_(seed) {}
  JudgmentOutcome judge(const JudgmentRequest& req) override;
  std::string tag() const override { return "oracle"; }

 private:
  std::uint64_t seed_;
};

// The oracle's verdict with probability `accuracy`, flipped otherwise.
class NoisyOracleJudge : public Judge {
 public:
  NoisyOracleJudge(double accuracy, std::uint64_t seed);
  JudgmentOutcome judge(const JudgmentRequest& req) override;
  std::string tag() const override;

 private:
  double accuracy_;
  std::uint64_t seed_;
};

// Content-addressed cache keyed by SHA-256 of (template id, rendered prompt).
// Concurrent requests for the same key share one backend call. With a cache
// directory, entries persist across runs as one file per key.
class CachedJudge : public Judge {
 public:
  explicit CachedJudge(std::shared_ptr<Judge> inner,
                       std::optional<std::filesystem::path> dir = std::nullopt);
  JudgmentOutcome judge(const JudgmentRequest& req) override;
  std::string tag() const override { return "cached(" + inner_->tag() + ")"; }

  std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  static std::string cache_key(const JudgmentRequest& req);

 private:
  std::optional<std::string> read_disk(const std::string& key) const;
  void write_disk(const std::string& key, const std::string& raw) const;

  std::shared_ptr<Judge> inner_;
  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<std::string>> entries_;
  std::atomic<std::size_t> backend_calls_{0};
};

struct RemoteJudgeConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  int max_tokens = 4096;
  int retries = 3;
  std::chrono::milliseconds request_timeout{120000};
  std::string api_token;  // sent as a bearer token when non-empty
};

// OpenAI-style chat completion client: one user message, temperature 0, one
// sample. Transport failures and 5xx/429 responses are retried.
class RemoteJudge : public Judge {
 public:
  explicit RemoteJudge(RemoteJudgeConfig config);
  JudgmentOutcome judge(const JudgmentRequest& req) override;
  std::string tag() const override { return "remote:" + config_.model; }

  // Sends one prompt and returns the first choice's message content.
  std::string complete(const std::string& prompt) const;

 private:
  RemoteJudgeConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

enum class JudgeKind { remote, oracle, noisy_oracle };

struct JudgeBackendConfig {
  JudgeKind kind = JudgeKind::oracle;
  bool cached = false;
  std::optional<std::filesystem::path> cache_dir;
  RemoteJudgeConfig remote;
  double accuracy = 1.0;
  std::uint64_t seed = 0;
};

std::shared_ptr<Judge> make_judge(const JudgeBackendConfig& config);

}  // namespace sqlsel
