#include "sqlsel/tournament.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "sqlsel/error.hpp"
#include "sqlsel/parallel.hpp"

namespace sqlsel {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::sc: return "sc";
    case Strategy::ct: return "ct";
    case Strategy::drt: return "drt";
    case Strategy::wct: return "wct";
  }
  return "wct";
}

std::optional<Strategy> parse_strategy(std::string_view s) noexcept {
  if (s == "sc") return Strategy::sc;
  if (s == "ct") return Strategy::ct;
  if (s == "drt") return Strategy::drt;
  if (s == "wct") return Strategy::wct;
  return std::nullopt;
}

std::string_view to_string(ParseFailurePolicy p) noexcept {
  return p == ParseFailurePolicy::strict ? "strict" : "abstain";
}

std::optional<std::size_t> resolve_parse_failure(ParseFailurePolicy policy, std::size_t a,
                                                 std::size_t b, Verdict winner) {
  switch (winner) {
    case Verdict::A: return a;
    case Verdict::B: return b;
    case Verdict::parse_failure:
      if (policy == ParseFailurePolicy::strict) return b;
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

const SchemaSnapshot& empty_snapshot() {
  static const SchemaSnapshot snap;
  return snap;
}

struct Contestant {
  std::size_t candidate;
  std::size_t cluster;
  std::size_t cardinality;
  OutcomePtr outcome;
};

JudgmentRequest make_request(const TournamentContext& ctx, const Contestant& a, const Contestant& b) {
  const auto& pool = *ctx.pool;
  JudgmentRequest req;
  if (ctx.question) {
    req.question_id = ctx.question->id;
    req.question = ctx.question->text;
    req.evidence = ctx.question->evidence;
  } else {
    req.question_id = pool.question_id;
  }
  const std::string& sql_a = pool.candidates.at(a.candidate).sql;
  const std::string& sql_b = pool.candidates.at(b.candidate).sql;
  req.schema_union = build_union_schema(ctx.schema ? *ctx.schema : empty_snapshot(), sql_a, sql_b);
  req.side_a = {a.candidate, sql_a, a.outcome};
  req.side_b = {b.candidate, sql_b, b.outcome};
  req.prompt_template = ctx.prompt_template;
  req.gold = ctx.gold;
  return req;
}

TournamentResult init_result(Strategy s, const std::vector<Contestant>& cs) {
  TournamentResult r;
  r.strategy = s;
  for (const auto& c : cs) {
    r.contestant_candidates.push_back(c.candidate);
    r.contestant_clusters.push_back(c.cluster);
    r.cardinalities.push_back(c.cardinality);
  }
  r.scores.assign(cs.size(), 0);
  r.weighted_scores.assign(cs.size(), 0);
  return r;
}

// Every ordered pair (a, b), a != b, judged once. Judgments may complete in
// any order; scores are folded over the trace in (a, b) order.
void round_robin(const TournamentContext& ctx, const std::vector<Contestant>& cs, Judge& judge,
                 TournamentResult& r) {
  const std::size_t n = cs.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n > 0 ? n - 1 : 0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  r.trace.resize(pairs.size());
  parallel_for(pairs.size(), ctx.jobs, [&](std::size_t i) {
    const auto [a, b] = pairs[i];
    ComparisonRecord rec;
    rec.a = a;
    rec.b = b;
    rec.a_candidate = cs[a].candidate;
    rec.b_candidate = cs[b].candidate;
    rec.a_outcome = cs[a].outcome;
    rec.b_outcome = cs[b].outcome;
    rec.judgment = judge_pair(judge, make_request(ctx, cs[a], cs[b]));
    r.trace[i] = std::move(rec);
  });
  for (const auto& rec : r.trace) {
    if (rec.judgment.winner == Verdict::parse_failure) ++r.parse_failures;
    if (auto to = resolve_parse_failure(ctx.parse_failure, rec.a, rec.b, rec.judgment.winner)) {
      ++r.scores[*to];
    }
  }
  r.judgment_count = r.trace.size();
}

// Index of the lexicographic maximum of key(i); counts ties on the primary key.
template <class Key, class Primary>
std::size_t argmax(std::size_t n, Key key, Primary primary, bool& tie_broken) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (key(i) > key(best)) best = i;
  }
  std::size_t sharing = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (primary(i) == primary(best)) ++sharing;
  }
  tie_broken = sharing > 1;
  return best;
}

void finish(const TournamentContext& ctx, TournamentResult& r, std::size_t winner) {
  r.winner = winner;
  r.winner_cluster = r.contestant_clusters[winner];
  r.selected_candidate_index = r.contestant_candidates[winner];
  r.selected_sql = ctx.pool->candidates.at(r.selected_candidate_index).sql;
}

std::vector<Contestant> proxies(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters) {
  std::vector<Contestant> cs;
  cs.reserve(clusters.size());
  for (const auto& c : clusters) {
    OutcomePtr o = c.proxy_index < ctx.outcomes.size() ? ctx.outcomes[c.proxy_index]
                                                       : c.representative_outcome;
    cs.push_back({c.proxy_index, c.index, c.cardinality(), std::move(o)});
  }
  return cs;
}

void require_clusters(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters) {
  if (!ctx.pool) throw std::invalid_argument("tournament context has no candidate pool");
  if (clusters.empty()) {
    throw NoExecutableCandidate("no executable candidate for question '" + ctx.pool->question_id + "'");
  }
}

TournamentResult run_cluster_tournament(Strategy s, const TournamentContext& ctx,
                                        std::span<const ConsistentCluster> clusters, Judge& judge) {
  require_clusters(ctx, clusters);
  const auto cs = proxies(ctx, clusters);
  TournamentResult r = init_result(s, cs);
  if (cs.size() > 1) round_robin(ctx, cs, judge, r);
  const auto n = cs.size();
  for (std::size_t k = 0; k < n; ++k) {
    r.weighted_scores[k] = static_cast<std::int64_t>(r.cardinalities[k]) * r.scores[k];
  }
  const auto& primary_scores = s == Strategy::wct ? r.weighted_scores : r.scores;
  const auto key = [&](std::size_t k) {
    return std::make_tuple(primary_scores[k], r.cardinalities[k], -static_cast<std::int64_t>(k));
  };
  const auto primary = [&](std::size_t k) { return primary_scores[k]; };
  finish(ctx, r, argmax(n, key, primary, r.tie_broken));
  return r;
}

}  // namespace

TournamentResult run_sc(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters) {
  require_clusters(ctx, clusters);
  const auto cs = proxies(ctx, clusters);
  TournamentResult r = init_result(Strategy::sc, cs);
  for (std::size_t k = 0; k < cs.size(); ++k) {
    r.scores[k] = r.weighted_scores[k] = static_cast<std::int64_t>(cs[k].cardinality);
  }
  const auto key = [&](std::size_t k) {
    return std::make_pair(r.cardinalities[k], -static_cast<std::int64_t>(k));
  };
  const auto primary = [&](std::size_t k) { return r.cardinalities[k]; };
  finish(ctx, r, argmax(cs.size(), key, primary, r.tie_broken));
  return r;
}

TournamentResult run_ct(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters,
                        Judge& judge) {
  return run_cluster_tournament(Strategy::ct, ctx, clusters, judge);
}

TournamentResult run_wct(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters,
                         Judge& judge) {
  return run_cluster_tournament(Strategy::wct, ctx, clusters, judge);
}

TournamentResult run_drt(const TournamentContext& ctx, std::span<const ConsistentCluster> clusters,
                         Judge& judge) {
  require_clusters(ctx, clusters);
  std::vector<Contestant> cs;
  for (const auto& c : clusters) {
    for (std::size_t m : c.member_indices) {
      OutcomePtr o = m < ctx.outcomes.size() ? ctx.outcomes[m] : c.representative_outcome;
      cs.push_back({m, c.index, c.cardinality(), std::move(o)});
    }
  }
  std::sort(cs.begin(), cs.end(),
            [](const Contestant& x, const Contestant& y) { return x.candidate < y.candidate; });
  TournamentResult r = init_result(Strategy::drt, cs);
  if (cs.size() > 1) round_robin(ctx, cs, judge, r);
  r.weighted_scores = r.scores;
  // Contestants are sorted by candidate index, so the lowest position wins ties.
  const auto key = [&](std::size_t i) {
    return std::make_pair(r.scores[i], -static_cast<std::int64_t>(i));
  };
  const auto primary = [&](std::size_t i) { return r.scores[i]; };
  finish(ctx, r, argmax(cs.size(), key, primary, r.tie_broken));
  return r;
}

TournamentResult run_strategy(Strategy s, const TournamentContext& ctx,
                              std::span<const ConsistentCluster> clusters, Judge* judge) {
  if (s == Strategy::sc) return run_sc(ctx, clusters);
  if (!judge) throw ConfigError("strategy " + std::string(to_string(s)) + " needs a judge");
  switch (s) {
    case Strategy::ct: return run_ct(ctx, clusters, *judge);
    case Strategy::drt: return run_drt(ctx, clusters, *judge);
    default: return run_wct(ctx, clusters, *judge);
  }
}

Selection select(const Question& question, const CandidatePool& pool,
                 std::span<const OutcomePtr> outcomes, const SchemaSnapshot& schema,
                 OutcomePtr gold, Judge* judge, const SelectionOptions& options) {
  Selection sel;
  sel.question_id = question.id;
  sel.strategy = options.strategy;
  sel.clustering = cluster_candidates(pool, outcomes);
  assign_proxies(sel.clustering, options.proxy, options.proxy_seed);

  if (sel.clustering.clusters.empty()) {
    if (pool.candidates.empty()) throw std::invalid_argument("empty candidate pool for '" + question.id + "'");
    sel.unexecutable = true;
    sel.selected_candidate_index = 0;
    sel.selected_sql = pool.candidates.front().sql;
    return sel;
  }

  TournamentContext ctx;
  ctx.question = &question;
  ctx.pool = &pool;
  ctx.outcomes = outcomes;
  ctx.schema = &schema;
  ctx.gold = std::move(gold);
  ctx.prompt_template = options.prompt_template;
  ctx.parse_failure = options.parse_failure;
  ctx.jobs = options.jobs;

  sel.tournament = run_strategy(options.strategy, ctx, sel.clustering.clusters, judge);
  sel.selected_sql = sel.tournament->selected_sql;
  sel.selected_candidate_index = sel.tournament->selected_candidate_index;
  sel.winner_cluster = sel.tournament->winner_cluster;
  return sel;
}

}  // namespace sqlsel
