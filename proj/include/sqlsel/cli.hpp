#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlsel/judge.hpp"
#include "sqlsel/simulate.hpp"
#include "sqlsel/sql_exec.hpp"
#include "sqlsel/tournament.hpp"

namespace sqlsel {

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path candidates;
  std::filesystem::path db_root;
  std::filesystem::path out = "out";
  std::vector<Strategy> strategies{Strategy::wct};
  JudgeKind judge = JudgeKind::oracle;
  std::string judge_url;
  std::string judge_model;
  std::vector<double> judge_accuracy{0.8};
  int judge_retries = 3;
  int judge_max_tokens = 4096;
  std::optional<bool> judge_cache;  // default: on for remote, off otherwise
  std::optional<std::filesystem::path> cache_dir;
  std::uint64_t seed = 0;
  PromptTemplate prompt_template = PromptTemplate::rjudge;
  ParseFailurePolicy parse_failure = ParseFailurePolicy::strict;
  ProxyPolicy proxy = ProxyPolicy::first_index;
  NormalizationConfig normalization;
  std::size_t jobs = 8;
  bool dry_run = false;
  std::size_t trials = 10000;
  PoolGeneratorConfig generator;
};

// Everything but secrets, in a fixed key order.
nlohmann::ordered_json config_to_json(const RunConfig& config);

// Backend configuration the run would use; the token comes from JUDGE_API_TOKEN.
JudgeBackendConfig judge_backend_config(const RunConfig& config);

// Each returns a process exit code. Failures are reported on `err` as one
// JSON object per line: {"error": <kind>, "message": <text>}.
int cmd_select(const RunConfig& config, std::ostream& log, std::ostream& err);
int cmd_prefpairs(const RunConfig& config, std::ostream& log, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& log, std::ostream& err);

// Parses argv (subcommand first) and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace sqlsel
