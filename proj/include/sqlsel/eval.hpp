#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlsel/dataset.hpp"
#include "sqlsel/tournament.hpp"

namespace sqlsel {

inline constexpr int kReportSchemaVersion = 1;

// A finished selection together with what is needed to score it.
struct EvaluatedSelection {
  Selection selection;
  std::optional<Difficulty> difficulty;
  OutcomePtr selected_outcome;  // execution of the selected SQL
  OutcomePtr gold;              // null when the question has no gold SQL
};

struct ExResult {
  std::optional<double> percent;  // absent when nothing could be scored
  std::size_t correct = 0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // no gold outcome
};

struct SaResult {
  std::optional<double> percent;  // absent when no judgment is gold-decidable
  std::size_t correct = 0;
  std::size_t decidable = 0;
  std::size_t total = 0;
};

struct EvalSummary {
  Strategy strategy = Strategy::wct;
  std::optional<double> ex_percent;
  std::optional<double> sa_percent;
  double avg_judgments = 0.0;
  std::optional<std::map<Difficulty, double>> per_difficulty;
  std::size_t question_count = 0;
  std::size_t excluded = 0;
};

// Rounds to two decimals.
double round2(double v) noexcept;

// Selections count as correct when their outcome is equivalent to gold.
ExResult compute_ex(std::span<const EvaluatedSelection> items);

// A judgment is gold-decidable iff exactly one side matches gold; it is
// correct iff the judge picked that side.
bool gold_decidable(const ComparisonRecord& rec, const ExecutionOutcome& gold);
void accumulate_sa(std::span<const ComparisonRecord> trace, const ExecutionOutcome& gold, SaResult& acc);
SaResult compute_sa(std::span<const EvaluatedSelection> items);

EvalSummary summarize(Strategy strategy, std::span<const EvaluatedSelection> items);

nlohmann::ordered_json summary_to_json(const EvalSummary& s);
nlohmann::ordered_json selection_to_json(const EvaluatedSelection& item);

// JSON report with every summary and every per-question trace. Keys are
// written in a fixed order, so identical inputs give identical bytes.
void emit_report(std::span<const EvalSummary> summaries,
                 std::span<const EvaluatedSelection> items, const std::filesystem::path& path);

}  // namespace sqlsel
