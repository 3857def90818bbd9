#include "sqlsel/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "sqlsel/error.hpp"
#include "sqlsel/eval.hpp"
#include "sqlsel/hashing.hpp"
#include "sqlsel/parallel.hpp"

namespace sqlsel {

SyntheticPool generate_pool(const PoolGeneratorConfig& cfg, std::uint64_t seed, std::size_t trial) {
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min || cfg.min_size < 1 || cfg.max_size < cfg.min_size) {
    throw ConfigError("invalid synthetic pool generator ranges");
  }
  SplitMix64 rng(derive_seed(seed, "pool:" + std::to_string(trial)));
  SyntheticPool sp;
  sp.question.id = "trial-" + std::to_string(trial);
  sp.question.text = "synthetic question " + std::to_string(trial);
  sp.question.db_id = "synthetic";
  sp.pool.question_id = sp.question.id;

  const auto k = static_cast<std::size_t>(rng.between(cfg.k_min, cfg.k_max));
  std::vector<std::size_t> sizes(k);
  for (auto& s : sizes) s = static_cast<std::size_t>(rng.between(cfg.min_size, cfg.max_size));
  std::sort(sizes.begin(), sizes.end(), std::greater<>());

  const bool present = rng.uniform() < cfg.gold_present_prob;
  const bool largest = rng.uniform() < cfg.gold_largest_prob;
  std::optional<std::size_t> gold_slot;  // position in `sizes`
  if (present) {
    if (k == 1 || largest) {
      if (k > 1 && sizes[0] == sizes[1]) ++sizes[0];
      gold_slot = 0;
    } else {
      gold_slot = 1 + rng.below(k - 1);
      if (sizes[*gold_slot] == sizes[0]) ++sizes[0];
    }
    sp.gold_cluster_size = sizes[*gold_slot];
    sp.gold_largest = *gold_slot == 0;
  }

  // Each synthetic cluster returns its own label as a one-cell result.
  std::vector<OutcomePtr> cluster_outcomes;
  for (std::size_t c = 0; c < k; ++c) {
    cluster_outcomes.push_back(std::make_shared<const ExecutionOutcome>(
        make_ok_outcome({{static_cast<std::int64_t>(c)}}, 1)));
  }
  sp.gold = gold_slot ? cluster_outcomes[*gold_slot]
                      : std::make_shared<const ExecutionOutcome>(make_ok_outcome({{std::int64_t{-1}}}, 1));

  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < k; ++c) labels.insert(labels.end(), sizes[c], c);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

  for (std::size_t i = 0; i < labels.size(); ++i) {
    sp.pool.candidates.push_back(
        {i, "SELECT " + std::to_string(labels[i]) + " -- sample " + std::to_string(i), std::nullopt});
    sp.outcomes.push_back(cluster_outcomes[labels[i]]);
  }
  return sp;
}

std::vector<SimulationRow> simulate(const SimulationConfig& config) {
  if (config.trials == 0) throw ConfigError("simulation needs at least one trial");
  for (double p : config.accuracies) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("judge accuracy must lie in [0, 1]");
  }
  const std::size_t n_acc = config.accuracies.size();
  const std::size_t n_str = config.strategies.size();

  // Per-trial tallies laid out [trial][accuracy][strategy].
  struct Tally {
    bool correct = false;
    std::size_t judgments = 0;
    std::size_t sa_correct = 0;
    std::size_t sa_decidable = 0;
  };
  std::vector<Tally> tallies(config.trials * n_acc * n_str);
  std::vector<char> present(config.trials, 0);
  const SchemaSnapshot schema;

  parallel_for(config.trials, config.jobs, [&](std::size_t t) {
    const SyntheticPool sp = generate_pool(config.generator, config.seed, t);
    present[t] = sp.gold_cluster_size > 0;
    for (std::size_t a = 0; a < n_acc; ++a) {
      NoisyOracleJudge judge(config.accuracies[a], config.seed);
      for (std::size_t s = 0; s < n_str; ++s) {
        SelectionOptions opts;
        opts.strategy = config.strategies[s];
        const Selection sel = select(sp.question, sp.pool, sp.outcomes, schema, sp.gold, &judge, opts);
        Tally& tally = tallies[(t * n_acc + a) * n_str + s];
        tally.correct = results_equivalent(*sp.outcomes[sel.selected_candidate_index], *sp.gold);
        tally.judgments = sel.judgment_count();
        if (sel.tournament) {
          SaResult sa;
          accumulate_sa(sel.tournament->trace, *sp.gold, sa);
          tally.sa_correct = sa.correct;
          tally.sa_decidable = sa.decidable;
        }
      }
    }
  });

  std::size_t n_present = 0;
  for (char p : present) n_present += p ? 1 : 0;
  const double trials = static_cast<double>(config.trials);

  std::vector<SimulationRow> rows;
  for (std::size_t a = 0; a < n_acc; ++a) {
    for (std::size_t s = 0; s < n_str; ++s) {
      std::size_t correct = 0, judgments = 0, sa_c = 0, sa_d = 0;
      for (std::size_t t = 0; t < config.trials; ++t) {
        const Tally& tally = tallies[(t * n_acc + a) * n_str + s];
        correct += tally.correct ? 1 : 0;
        judgments += tally.judgments;
        sa_c += tally.sa_correct;
        sa_d += tally.sa_decidable;
      }
      SimulationRow row;
      row.accuracy = config.accuracies[a];
      row.strategy = config.strategies[s];
      row.trials = config.trials;
      row.mean_ex = 100.0 * static_cast<double>(correct) / trials;
      row.mean_judgments = static_cast<double>(judgments) / trials;
      if (sa_d) row.mean_sa = 100.0 * static_cast<double>(sa_c) / static_cast<double>(sa_d);
      row.pass_at_n = 100.0 * static_cast<double>(n_present) / trials;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_simulation_csv(std::span<const SimulationRow> rows, std::ostream& out) {
  out << "schema_version,accuracy,strategy,trials,mean_ex,mean_judgments,mean_sa,pass_at_n\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.4f,%s,%zu,%.4f,%.4f,", kSimulationSchemaVersion, r.accuracy,
                  std::string(to_string(r.strategy)).c_str(), r.trials, r.mean_ex, r.mean_judgments);
    out << buf;
    // an empty field when no judgment was gold-decidable
    if (r.mean_sa) {
      std::snprintf(buf, sizeof buf, "%.4f", *r.mean_sa);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.4f\n", r.pass_at_n);
    out << buf;
  }
}

void write_simulation_csv(std::span<const SimulationRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_simulation_csv(rows, out);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sqlsel
