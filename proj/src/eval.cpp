#include "sqlsel/eval.hpp"

#include <cmath>
#include <fstream>

#include "sqlsel/error.hpp"

namespace sqlsel {

using ojson = nlohmann::ordered_json;

double round2(double v) noexcept { return std::round(v * 100.0) / 100.0; }

ExResult compute_ex(std::span<const EvaluatedSelection> items) {
  ExResult r;
  for (const auto& it : items) {
    if (!it.gold) {
      ++r.excluded;
      continue;
    }
    ++r.evaluated;
    if (it.selected_outcome && results_equivalent(*it.selected_outcome, *it.gold)) ++r.correct;
  }
  if (r.evaluated > 0) r.percent = round2(100.0 * static_cast<double>(r.correct) / static_cast<double>(r.evaluated));
  return r;
}

bool gold_decidable(const ComparisonRecord& rec, const ExecutionOutcome& gold) {
  const bool a = rec.a_outcome && results_equivalent(*rec.a_outcome, gold);
  const bool b = rec.b_outcome && results_equivalent(*rec.b_outcome, gold);
  return a != b;
}

void accumulate_sa(std::span<const ComparisonRecord> trace, const ExecutionOutcome& gold, SaResult& acc) {
  for (const auto& rec : trace) {
    ++acc.total;
    if (!gold_decidable(rec, gold)) continue;
    ++acc.decidable;
    const bool a_is_gold = rec.a_outcome && results_equivalent(*rec.a_outcome, gold);
    const Verdict right = a_is_gold ? Verdict::A : Verdict::B;
    if (rec.judgment.winner == right) ++acc.correct;
  }
  acc.percent.reset();
  if (acc.decidable > 0) {
    acc.percent = round2(100.0 * static_cast<double>(acc.correct) / static_cast<double>(acc.decidable));
  }
}

SaResult compute_sa(std::span<const EvaluatedSelection> items) {
  SaResult r;
  for (const auto& it : items) {
    if (!it.gold || !it.selection.tournament) continue;
    accumulate_sa(it.selection.tournament->trace, *it.gold, r);
  }
  return r;
}

EvalSummary summarize(Strategy strategy, std::span<const EvaluatedSelection> items) {
  EvalSummary s;
  s.strategy = strategy;
  s.question_count = items.size();
  const ExResult ex = compute_ex(items);
  s.ex_percent = ex.percent;
  s.excluded = ex.excluded;
  s.sa_percent = compute_sa(items).percent;
  std::size_t judgments = 0;
  for (const auto& it : items) judgments += it.selection.judgment_count();
  s.avg_judgments = items.empty() ? 0.0 : round2(static_cast<double>(judgments) / static_cast<double>(items.size()));

  std::map<Difficulty, std::vector<EvaluatedSelection>> groups;
  for (const auto& it : items) {
    if (it.difficulty) groups[*it.difficulty].push_back(it);
  }
  if (!groups.empty()) {
    s.per_difficulty.emplace();
    for (const auto& [d, group] : groups) {
      if (auto p = compute_ex(group).percent) (*s.per_difficulty)[d] = *p;
    }
  }
  return s;
}

namespace {

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

ojson summary_to_json(const EvalSummary& s) {
  ojson j;
  j["strategy"] = std::string(to_string(s.strategy));
  j["question_count"] = s.question_count;
  j["excluded"] = s.excluded;
  j["ex_percent"] = optional_number(s.ex_percent);
  j["sa_percent"] = optional_number(s.sa_percent);
  j["avg_judgments"] = s.avg_judgments;
  if (s.per_difficulty) {
    ojson d = ojson::object();
    for (const auto& [k, v] : *s.per_difficulty) d[std::string(to_string(k))] = v;
    j["per_difficulty"] = std::move(d);
  }
  return j;
}

ojson selection_to_json(const EvaluatedSelection& item) {
  const Selection& sel = item.selection;
  ojson j;
  j["question_id"] = sel.question_id;
  j["strategy"] = std::string(to_string(sel.strategy));
  j["selected_candidate_index"] = sel.selected_candidate_index;
  j["selected_sql"] = sel.selected_sql;
  j["winner_cluster"] = sel.winner_cluster ? ojson(*sel.winner_cluster) : ojson(nullptr);
  j["unexecutable"] = sel.unexecutable;
  if (item.gold) {
    j["correct"] = item.selected_outcome && results_equivalent(*item.selected_outcome, *item.gold);
  } else {
    j["correct"] = nullptr;
  }

  ojson clusters = ojson::array();
  for (const auto& c : sel.clustering.clusters) {
    ojson cj;
    cj["index"] = c.index;
    cj["members"] = c.member_indices;
    cj["cardinality"] = c.cardinality();
    cj["proxy"] = c.proxy_index;
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  j["discarded"] = sel.clustering.discarded;

  if (const auto& t = sel.tournament) {
    j["contestants"] = t->contestant_candidates;
    j["scores"] = t->scores;
    j["weighted_scores"] = t->weighted_scores;
    j["judgment_count"] = t->judgment_count;
    j["tie_broken"] = t->tie_broken;
    j["parse_failures"] = t->parse_failures;
    ojson trace = ojson::array();
    for (const auto& rec : t->trace) {
      ojson r;
      r["a"] = rec.a;
      r["b"] = rec.b;
      r["a_candidate"] = rec.a_candidate;
      r["b_candidate"] = rec.b_candidate;
      r["winner"] = std::string(to_string(rec.judgment.winner));
      r["format_ok"] = rec.judgment.format_ok;
      trace.push_back(std::move(r));
    }
    j["trace"] = std::move(trace);
  } else {
    j["judgment_count"] = 0;
  }
  return j;
}

void emit_report(std::span<const EvalSummary> summaries,
                 std::span<const EvaluatedSelection> items, const std::filesystem::path& path) {
  ojson report;
  report["schema_version"] = kReportSchemaVersion;
  ojson sums = ojson::array();
  for (const auto& s : summaries) sums.push_back(summary_to_json(s));
  report["summaries"] = std::move(sums);
  ojson qs = ojson::array();
  for (const auto& it : items) qs.push_back(selection_to_json(it));
  report["questions"] = std::move(qs);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << report.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sqlsel
