#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "sqlsel/error.hpp"
#include "sqlsel/simulate.hpp"

namespace sqlsel {
namespace {

std::string csv(const std::vector<SimulationRow>& rows) {
  std::ostringstream ss;
  write_simulation_csv(rows, ss);
  return ss.str();
}

const SimulationRow& row(const std::vector<SimulationRow>& rows, double p, Strategy s) {
  for (const auto& r : rows)
    if (r.accuracy == p && r.strategy == s) return r;
  throw std::runtime_error("row missing");
}

TEST(GeneratePool, ShapeAndGoldPlacement) {
  PoolGeneratorConfig cfg;
  std::size_t largest = 0;
  const std::size_t n = 2000;
  for (std::size_t t = 0; t < n; ++t) {
    const auto sp = generate_pool(cfg, 5, t);
    const auto cl = cluster_candidates(sp.pool, sp.outcomes);
    ASSERT_GE(cl.clusters.size(), std::size_t(cfg.k_min));
    ASSERT_LE(cl.clusters.size(), std::size_t(cfg.k_max));
    EXPECT_TRUE(cl.discarded.empty());
    std::size_t gold_size = 0, max_other = 0;
    for (const auto& c : cl.clusters) {
      if (results_equivalent(*c.representative_outcome, *sp.gold)) gold_size = c.cardinality();
      else max_other = std::max(max_other, c.cardinality());
    }
    EXPECT_EQ(gold_size, sp.gold_cluster_size);
    EXPECT_EQ(sp.gold_largest, gold_size > max_other);
    if (!sp.gold_largest) EXPECT_LT(gold_size, max_other);
    largest += sp.gold_largest;
  }
  EXPECT_NEAR(double(largest) / n, cfg.gold_largest_prob, 0.04);
}

TEST(GeneratePool, Deterministic) {
  PoolGeneratorConfig cfg;
  const auto a = generate_pool(cfg, 1, 17), b = generate_pool(cfg, 1, 17);
  ASSERT_EQ(a.pool.size(), b.pool.size());
  for (std::size_t i = 0; i < a.pool.size(); ++i) EXPECT_EQ(a.pool.candidates[i].sql, b.pool.candidates[i].sql);
}

TEST(GeneratePool, GoldAbsent) {
  PoolGeneratorConfig cfg;
  cfg.gold_present_prob = 0.0;
  const auto sp = generate_pool(cfg, 1, 0);
  EXPECT_EQ(sp.gold_cluster_size, 0u);
  for (const auto& o : sp.outcomes) EXPECT_FALSE(results_equivalent(*o, *sp.gold));
}

TEST(GeneratePool, BadRanges) {
  PoolGeneratorConfig cfg;
  cfg.k_min = 5;
  cfg.k_max = 2;
  EXPECT_THROW(generate_pool(cfg, 0, 0), ConfigError);
}

TEST(Simulate, SweepRowsAndReproducible) {
  SimulationConfig cfg;
  cfg.accuracies = {0.6, 0.8, 1.0};
  cfg.trials = 300;
  cfg.seed = 11;
  const auto rows = simulate(cfg);
  EXPECT_EQ(rows.size(), 3 * cfg.strategies.size());
  EXPECT_EQ(csv(rows), csv(simulate(cfg)));
  cfg.jobs = 4;
  EXPECT_EQ(csv(rows), csv(simulate(cfg)));
  const auto text = csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "schema_version,accuracy,strategy,trials,mean_ex,mean_judgments,mean_sa,pass_at_n");
}

TEST(Simulate, PerfectJudge) {
  SimulationConfig cfg;
  cfg.accuracies = {1.0};
  cfg.trials = 2000;
  cfg.seed = 3;
  const auto rows = simulate(cfg);
  const auto& ct = row(rows, 1.0, Strategy::ct);
  EXPECT_EQ(ct.mean_ex, ct.pass_at_n);
  EXPECT_EQ(row(rows, 1.0, Strategy::drt).mean_ex, ct.pass_at_n);
  EXPECT_LE(row(rows, 1.0, Strategy::wct).mean_ex, ct.pass_at_n);
  EXPECT_EQ(ct.mean_sa, std::optional<double>(100.0));
  EXPECT_FALSE(row(rows, 1.0, Strategy::sc).mean_sa.has_value());
  EXPECT_EQ(row(rows, 1.0, Strategy::sc).mean_judgments, 0.0);
}

TEST(Simulate, CostColumnsMatchExpectation) {
  SimulationConfig cfg;
  cfg.trials = 500;
  cfg.seed = 9;
  double kk = 0, mm = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const auto sp = generate_pool(cfg.generator, cfg.seed, t);
    std::set<std::string> distinct;
    for (const auto& o : sp.outcomes) distinct.insert(o->result->fingerprint);
    const double K = double(distinct.size()), M = double(sp.pool.size());
    kk += K * (K - 1);
    mm += M * (M - 1);
  }
  const auto rows = simulate(cfg);
  EXPECT_DOUBLE_EQ(row(rows, 0.8, Strategy::wct).mean_judgments, kk / cfg.trials);
  EXPECT_DOUBLE_EQ(row(rows, 0.8, Strategy::ct).mean_judgments, kk / cfg.trials);
  EXPECT_DOUBLE_EQ(row(rows, 0.8, Strategy::drt).mean_judgments, mm / cfg.trials);
  EXPECT_LE(row(rows, 0.8, Strategy::wct).mean_judgments, row(rows, 0.8, Strategy::drt).mean_judgments);
}

TEST(Simulate, CoinFlipJudgeTwoClusters) {
  // p=0.5, K=2, gold cluster always the larger one
  SimulationConfig cfg;
  cfg.accuracies = {0.5};
  cfg.trials = 10000;
  cfg.seed = 2;
  cfg.generator.k_min = cfg.generator.k_max = 2;
  cfg.generator.min_size = cfg.generator.max_size = 2;
  cfg.generator.gold_largest_prob = 1.0;
  cfg.strategies = {Strategy::ct, Strategy::wct};
  cfg.jobs = 4;
  const auto rows = simulate(cfg);
  const auto& ct = row(rows, 0.5, Strategy::ct);
  const auto& wct = row(rows, 0.5, Strategy::wct);
  EXPECT_NEAR(ct.mean_ex, 75.0, 2.0);  // ties (1-1) fall to the larger cluster
  EXPECT_GE(wct.mean_ex, ct.mean_ex);
}

TEST(Simulate, BadConfig) {
  SimulationConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(simulate(cfg), ConfigError);
  cfg.trials = 1;
  cfg.accuracies = {1.2};
  EXPECT_THROW(simulate(cfg), ConfigError);
}

}  // namespace
}  // namespace sqlsel
