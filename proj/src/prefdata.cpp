#include "sqlsel/prefdata.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "sqlsel/error.hpp"
#include "sqlsel/hashing.hpp"
#include "sqlsel/schema_linker.hpp"
#include "sqlsel/text.hpp"

namespace sqlsel {

using json = nlohmann::ordered_json;

std::string question_block(const Question& q) {
  if (trim(q.evidence).empty()) return q.text;
  return q.evidence + "\n" + q.text;
}

PreferenceBuild build_preference_pairs(const Question& question, const CandidatePool& pool,
                                       std::span<const OutcomePtr> outcomes,
                                       const ExecutionOutcome& gold, const SchemaSnapshot& schema,
                                       const PreferenceOptions& options) {
  PreferenceBuild out;
  if (!gold.ok()) {
    out.skip_reason = "gold SQL did not execute: " + gold.error_message.value_or("unknown error");
    return out;
  }
  const ClusteringOutput clustering = cluster_candidates(pool, outcomes);
  const ConsistentCluster* positive = nullptr;
  std::vector<const ConsistentCluster*> negatives;
  for (const auto& c : clustering.clusters) {
    if (!positive && results_equivalent(*c.representative_outcome, gold)) {
      positive = &c;
    } else {
      negatives.push_back(&c);
    }
  }
  if (!positive) {
    out.skip_reason = "no candidate matches the gold result";
    return out;
  }

  std::vector<std::size_t> positives = positive->member_indices;
  if (options.positive_seed) {
    SplitMix64 rng(derive_seed(*options.positive_seed, "positives:" + question.id));
    for (std::size_t i = positives.size(); i > 1; --i) {
      std::swap(positives[i - 1], positives[rng.below(i)]);
    }
  }

  const std::size_t count = std::min(positives.size(), negatives.size());
  const std::string x = question_block(question);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = positives[i];
    const std::size_t neg = negatives[i]->proxy_index;
    PreferencePair p;
    p.question_id = question.id;
    p.x = x;
    p.y_pos = pool.candidates.at(pos).sql;
    p.y_neg = pool.candidates.at(neg).sql;
    p.d_uni_text = build_union_schema(schema, p.y_pos, p.y_neg).ddl_text;
    p.e_pos = outcomes[pos]->rendered;
    p.e_neg = outcomes[neg]->rendered;
    p.label = Verdict::A;
    p.order_id = 0;
    out.pairs.push_back(p);
    p.label = Verdict::B;
    p.order_id = 1;
    out.pairs.push_back(std::move(p));
  }
  return out;
}

int evaluate_reward(const RewardInput& input) {
  const ParsedJudgment parsed = parse_judgment(input.output);
  return parsed.format_ok && parsed.winner == input.gold_label ? 1 : 0;
}

std::string to_json_line(const PreferencePair& p) {
  json j;
  j["question_id"] = p.question_id;
  j["x"] = p.x;
  j["d_uni"] = p.d_uni_text;
  j["y_pos"] = p.y_pos;
  j["y_neg"] = p.y_neg;
  j["e_pos"] = p.e_pos;
  j["e_neg"] = p.e_neg;
  j["label"] = std::string(to_string(p.label));
  j["order_id"] = p.order_id;
  j["reasoning_trace"] = p.reasoning_trace ? json(*p.reasoning_trace) : json(nullptr);
  return j.dump();
}

PreferencePair pair_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    PreferencePair p;
    p.question_id = j.at("question_id").get<std::string>();
    p.x = j.at("x").get<std::string>();
    p.d_uni_text = j.at("d_uni").get<std::string>();
    p.y_pos = j.at("y_pos").get<std::string>();
    p.y_neg = j.at("y_neg").get<std::string>();
    p.e_pos = j.at("e_pos").get<std::string>();
    p.e_neg = j.at("e_neg").get<std::string>();
    const auto label = j.at("label").get<std::string>();
    if (label != "A" && label != "B") throw ParseError("label must be A or B");
    p.label = label == "A" ? Verdict::A : Verdict::B;
    p.order_id = j.at("order_id").get<int>();
    if (j.contains("reasoning_trace") && !j["reasoning_trace"].is_null()) {
      p.reasoning_trace = j["reasoning_trace"].get<std::string>();
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("preference record: ") + e.what());
  }
}

std::size_t export_pairs(std::span<const PreferencePair> pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : pairs) out << to_json_line(p) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
  return pairs.size();
}

std::vector<PreferencePair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PreferencePair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(pair_from_json_line(line));
  }
  return out;
}

}  // namespace sqlsel
