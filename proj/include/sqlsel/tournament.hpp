#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlsel/clustering.hpp"
#include "sqlsel/dataset.hpp"
#include "sqlsel/judge.hpp"

namespace sqlsel {

enum class Strategy { sc, ct, drt, wct };
enum class ParseFailurePolicy { strict, abstain };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view s) noexcept;
std::string_view to_string(ParseFailurePolicy p) noexcept;

// Everything a tournament needs besides clusters and a judge.
struct TournamentContext {
  const Question* question = nullptr;
  const CandidatePool* pool = nullptr;
  std::span<const OutcomePtr> outcomes;  // aligned with pool
  const SchemaSnapshot* schema = nullptr;
  OutcomePtr gold;  // forwarded to oracle judges
  PromptTemplate prompt_template = PromptTemplate::rjudge;
  ParseFailurePolicy parse_failure = ParseFailurePolicy::strict;
  std::size_t jobs = 1;  // concurrent judgments within the question
};

// One ordered comparison: contestant a sat in slot A, b in slot B.
struct ComparisonRecord {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t a_candidate = 0;
  std::size_t b_candidate = 0;
  OutcomePtr a_outcome;
  OutcomePtr b_outcome;
  JudgmentOutcome judgment;
};

// Contestants are cluster proxies for sc/ct/wct and individual executable
// candidates for drt.
struct TournamentResult {
  Strategy strategy = Strategy::wct;
  std::vector<std::size_t> contestant_candidates;
  std::vector<std::size_t> contestant_clusters;
  std::vector<std::size_t> cardinalities;  // per contestant's cluster
  std::vector<std::int64_t> scores;
  std::vector<std::int64_t> weighted_scores;
  std::size_t winner = 0;  // contestant position
  std::size_t winner_cluster = 0;
  std::size_t selected_candidate_index = 0;
  std::string selected_sql;
  std::size_t judgment_count = 0;
  std::vector<ComparisonRecord> trace;
  bool tie_broken = false;
  std::size_t parse_failures = 0;
};

// Who gets the point for a judgment over the ordered pair (a in A, b in B).
// Under strict, anything but a clean A goes to b; under abstain a parse
// failure scores nobody.
std::optional<std::size_t> resolve_parse_failure(ParseFailurePolicy policy, std::size_t a,
                                                 std::size_t b, Verdict winner);

// Self-consistency: largest cluster, ties to the lowest cluster index.
TournamentResult run_sc(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters);

// Round robin over proxies, both orders. Winner = max S, then max |C|, then
// lowest index.
TournamentResult run_ct(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters,
                        Judge& judge);

// As run_ct, scored by S_w = |C| * S.
TournamentResult run_wct(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters,
                         Judge& judge);

// Round robin over every executable candidate individually, both orders.
// Winner = max score, ties to the lowest candidate index.
TournamentResult run_drt(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters,
                         Judge& judge);

TournamentResult run_strategy(Strategy s, const TournamentContext& ctx,
                              std::span<const ConsistentCluster> clusters, Judge* judge);

struct SelectionOptions {
  Strategy strategy = Strategy::wct;
  PromptTemplate prompt_template = PromptTemplate::rjudge;
  ParseFailurePolicy parse_failure = ParseFailurePolicy::strict;
  ProxyPolicy proxy = ProxyPolicy::first_index;
  std::optional<std::uint64_t> proxy_seed;
  std::size_t jobs = 1;
};

struct Selection {
  std::string question_id;
  Strategy strategy = Strategy::wct;
  std::string selected_sql;
  std::size_t selected_candidate_index = 0;
  std::optional<std::size_t> winner_cluster;  // absent on fallback
  bool unexecutable = false;                  // no candidate executed; candidate 0 returned
  ClusteringOutput clustering;
  std::optional<TournamentResult> tournament;

  std::size_t judgment_count() const noexcept { return tournament ? tournament->judgment_count : 0; }
};

// Clusters the pool and runs the chosen strategy. With no executable
// candidate, returns candidate 0 flagged unexecutable.
Selection select(const Question& question, const CandidatePool& pool,
                 std::span<const OutcomePtr> outcomes, const SchemaSnapshot& schema,
                 OutcomePtr gold, Judge* judge, const SelectionOptions& options);

}  // namespace sqlsel
