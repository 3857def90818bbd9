#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sqlsel/tournament.hpp"

namespace sqlsel {

inline constexpr int kSimulationSchemaVersion = 1;

// Synthetic pools: K uniform in [k_min, k_max], cluster sizes uniform in
// [min_size, max_size]. With probability gold_largest_prob the gold cluster
// is strictly the largest, otherwise some other cluster strictly outsizes it.
struct PoolGeneratorConfig {
  int k_min = 2;
  int k_max = 6;
  int min_size = 1;
  int max_size = 4;
  double gold_largest_prob = 0.6;
  double gold_present_prob = 1.0;
};

struct SimulationConfig {
  std::vector<double> accuracies{0.8};
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::vector<Strategy> strategies{Strategy::sc, Strategy::ct, Strategy::drt, Strategy::wct};
  PoolGeneratorConfig generator;
  std::size_t jobs = 1;
};

// One generated question: pool, per-candidate outcomes, gold outcome.
struct SyntheticPool {
  Question question;
  CandidatePool pool;
  std::vector<OutcomePtr> outcomes;
  OutcomePtr gold;
  std::size_t gold_cluster_size = 0;  // 0 when gold is absent
  bool gold_largest = false;
};

SyntheticPool generate_pool(const PoolGeneratorConfig& config, std::uint64_t seed, std::size_t trial);

struct SimulationRow {
  double accuracy = 0.0;
  Strategy strategy = Strategy::wct;
  std::size_t trials = 0;
  double mean_ex = 0.0;         // percent
  double mean_judgments = 0.0;
  std::optional<double> mean_sa;  // percent over gold-decidable judgments; absent when none
  double pass_at_n = 0.0;       // percent of pools containing gold
};

// Rows ordered by accuracy (config order), then strategy (config order).
// Deterministic for a fixed config regardless of `jobs`.
std::vector<SimulationRow> simulate(const SimulationConfig& config);

void write_simulation_csv(std::span<const SimulationRow> rows, std::ostream& out);
void write_simulation_csv(std::span<const SimulationRow> rows, const std::filesystem::path& path);

}  // namespace sqlsel
