#include "sqlsel/judge.hpp"

#include <fstream>
#include <sstream>

#include "sqlsel/error.hpp"
#include "sqlsel/hashing.hpp"

namespace sqlsel {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

JudgmentOutcome judge_pair(Judge& judge, const JudgmentRequest& req) {
  const auto start = Clock::now();
  JudgmentOutcome out = judge.judge(req);
  out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return out;
}

namespace {

// Stream for one ordered comparison. Draw 0 is the tie coin, draw 1 the noise.
SplitMix64 pair_stream(std::uint64_t seed, const JudgmentRequest& req) {
  const std::string key = req.question_id + '\x1f' + std::to_string(req.side_a.candidate_index) +
                          '\x1f' + std::to_string(req.side_b.candidate_index);
  return SplitMix64(derive_seed(seed, key));
}

struct OracleDecision {
  Verdict winner;
  bool coin;
};

OracleDecision oracle_decide(const JudgmentRequest& req, SplitMix64& rng) {
  if (!req.gold) {
    throw ConfigError("oracle judge needs a gold result for question '" + req.question_id + "'");
  }
  const bool coin_is_a = (rng.next() >> 63) == 0;
  const bool a_ok = req.side_a.outcome && results_equivalent(*req.side_a.outcome, *req.gold);
  const bool b_ok = req.side_b.outcome && results_equivalent(*req.side_b.outcome, *req.gold);
  if (a_ok != b_ok) return {a_ok ? Verdict::A : Verdict::B, false};
  return {coin_is_a ? Verdict::A : Verdict::B, true};
}

JudgmentOutcome synthetic_outcome(Verdict winner, std::string reasoning, std::string tag) {
  JudgmentOutcome out;
  out.winner = winner;
  out.raw_response = "<think>" + reasoning + "</think><answer>" + std::string(to_string(winner)) + "</answer>";
  out.reasoning_text = std::move(reasoning);
  out.format_ok = true;
  out.backend_tag = std::move(tag);
  return out;
}

std::string oracle_reason(const OracleDecision& d) {
  if (d.coin) return "neither or both candidates match the gold result; seeded coin chose " +
                     std::string(to_string(d.winner));
  return "candidate " + std::string(to_string(d.winner)) + " matches the gold result";
}

}  // namespace

JudgmentOutcome OracleJudge::judge(const JudgmentRequest& req) {
  auto rng = pair_stream(seed_, req);
  const auto d = oracle_decide(req, rng);
  return synthetic_outcome(d.winner, oracle_reason(d), tag());
}

NoisyOracleJudge::NoisyOracleJudge(double accuracy, std::uint64_t seed)
    : accuracy_(accuracy), seed_(seed) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw ConfigError("judge accuracy must lie in [0, 1]");
  }
}

std::string NoisyOracleJudge::tag() const {
  std::ostringstream ss;
  ss << "noisy_oracle(p=" << accuracy_ << ")";
  return ss.str();
}

JudgmentOutcome NoisyOracleJudge::judge(const JudgmentRequest& req) {
  auto rng = pair_stream(seed_, req);
  auto d = oracle_decide(req, rng);
  std::string reason = oracle_reason(d);
  if (rng.uniform() >= accuracy_) {
    d.winner = flip(d.winner);
    reason += "; flipped by noise";
  }
  return synthetic_outcome(d.winner, std::move(reason), tag());
}

CachedJudge::CachedJudge(std::shared_ptr<Judge> inner, std::optional<fs::path> dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    fs::create_directories(*dir_, ec);
    if (ec) throw IoError("cannot create cache directory " + dir_->string() + ": " + ec.message());
  }
}

std::string CachedJudge::cache_key(const JudgmentRequest& req) {
  std::string material(to_string(req.prompt_template));
  material += '\n';
  material += render_prompt(req);
  return sha256_hex(material);
}

std::optional<std::string> CachedJudge::read_disk(const std::string& key) const {
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / (key + ".txt"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void CachedJudge::write_disk(const std::string& key, const std::string& raw) const {
  if (!dir_) return;
  const fs::path final_path = *dir_ / (key + ".txt");
  const fs::path tmp = *dir_ / (key + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry " + tmp.string());
    out << raw;
  }
  fs::rename(tmp, final_path);
}

JudgmentOutcome CachedJudge::judge(const JudgmentRequest& req) {
  const std::string key = cache_key(req);
  std::shared_future<std::string> entry;
  std::promise<std::string> promise;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      entry = promise.get_future().share();
      entries_.emplace(key, entry);
      owner = true;
    } else {
      entry = it->second;
    }
  }

  if (owner) {
    try {
      std::optional<std::string> raw = read_disk(key);
      if (!raw) {
        ++backend_calls_;
        raw = inner_->judge(req).raw_response;
        write_disk(key, *raw);
      }
      promise.set_value(*raw);
    } catch (...) {
      {
        std::lock_guard lock(mu_);
        entries_.erase(key);  // a failed call must not poison the key
      }
      promise.set_exception(std::current_exception());
    }
  }

  const std::string raw = entry.get();
  const ParsedJudgment parsed = parse_judgment(raw);
  JudgmentOutcome out;
  out.winner = parsed.winner;
  out.raw_response = raw;
  out.reasoning_text = parsed.reasoning;
  out.format_ok = parsed.format_ok;
  out.backend_tag = tag();
  return out;
}

std::shared_ptr<Judge> make_judge(const JudgeBackendConfig& config) {
  std::shared_ptr<Judge> base;
  switch (config.kind) {
    case JudgeKind::remote: base = std::make_shared<RemoteJudge>(config.remote); break;
    case JudgeKind::oracle: base = std::make_shared<OracleJudge>(config.seed); break;
    case JudgeKind::noisy_oracle:
      base = std::make_shared<NoisyOracleJudge>(config.accuracy, config.seed);
      break;
  }
  if (config.cached) return std::make_shared<CachedJudge>(std::move(base), config.cache_dir);
  return base;
}

}  // namespace sqlsel
