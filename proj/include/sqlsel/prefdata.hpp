#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlsel/clustering.hpp"
#include "sqlsel/dataset.hpp"
#include "sqlsel/judge.hpp"

namespace sqlsel {

// One judge-training record. `label` names the prompt slot (A or B) that
// holds y_pos in this ordering; the twin with the other order_id carries
// the opposite label.
struct PreferencePair {
  std::string question_id;
  std::string x;
  std::string d_uni_text;
  std::string y_pos;
  std::string y_neg;
  std::string e_pos;
  std::string e_neg;
  Verdict label = Verdict::A;
  int order_id = 0;
  std::optional<std::string> reasoning_trace;

  bool operator==(const PreferencePair&) const = default;
};

struct PreferenceBuild {
  std::vector<PreferencePair> pairs;
  std::optional<std::string> skip_reason;  // set when the question was skipped
};

struct PreferenceOptions {
  // When set, positives are drawn in a seeded shuffle instead of member order.
  std::optional<std::uint64_t> positive_seed;
};

// Pairs min(|C_pos|, K-1) positives (member order) with one proxy from each
// negative cluster (cluster order), then emits every pair in both orders.
PreferenceBuild build_preference_pairs(const Question& question, const CandidatePool& pool,
                                       std::span<const OutcomePtr> outcomes,
                                       const ExecutionOutcome& gold, const SchemaSnapshot& schema,
                                       const PreferenceOptions& options = {});

// "evidence\nquestion", or just the question when there is no evidence.
std::string question_block(const Question& q);

struct RewardInput {
  std::string output;
  Verdict gold_label = Verdict::A;
};

// 1 iff the output passes the think/answer format check and its answer
// equals the gold label.
int evaluate_reward(const RewardInput& input);

std::string to_json_line(const PreferencePair& p);
PreferencePair pair_from_json_line(const std::string& line);

// Line-delimited JSON; returns records written.
std::size_t export_pairs(std::span<const PreferencePair> pairs, const std::filesystem::path& path);
std::vector<PreferencePair> load_pairs(const std::filesystem::path& path);

}  // namespace sqlsel
