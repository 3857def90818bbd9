#include "sqlsel/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include "sqlsel/dataset.hpp"
#include "sqlsel/error.hpp"
#include "sqlsel/eval.hpp"
#include "sqlsel/parallel.hpp"
#include "sqlsel/prefdata.hpp"

namespace sqlsel {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string_view judge_name(JudgeKind k) {
  switch (k) {
    case JudgeKind::remote: return "remote";
    case JudgeKind::oracle: return "oracle";
    case JudgeKind::noisy_oracle: return "noisy";
  }
  return "oracle";
}

bool judge_cache_enabled(const RunConfig& c) {
  return c.judge_cache.value_or(c.judge == JudgeKind::remote);
}

fs::path cache_dir_of(const RunConfig& c) { return c.cache_dir.value_or(c.out / "judge_cache"); }

}  // namespace

ojson config_to_json(const RunConfig& c) {
  ojson j;
  j["dataset"] = c.dataset.string();
  j["candidates"] = c.candidates.string();
  j["db_root"] = c.db_root.string();
  j["out"] = c.out.string();
  ojson strategies = ojson::array();
  for (auto s : c.strategies) strategies.push_back(std::string(to_string(s)));
  j["strategies"] = std::move(strategies);
  j["judge"] = std::string(judge_name(c.judge));
  j["judge_url"] = c.judge_url;
  j["judge_model"] = c.judge_model;
  j["judge_accuracy"] = c.judge_accuracy;
  j["judge_retries"] = c.judge_retries;
  j["judge_max_tokens"] = c.judge_max_tokens;
  j["judge_temperature"] = 0;
  j["judge_cache"] = judge_cache_enabled(c);
  j["cache_dir"] = judge_cache_enabled(c) ? ojson(cache_dir_of(c).string()) : ojson(nullptr);
  j["seed"] = c.seed;
  j["template"] = std::string(to_string(c.prompt_template));
  j["parse_failure"] = std::string(to_string(c.parse_failure));
  j["proxy"] = c.proxy == ProxyPolicy::first_index ? "first" : "random";
  j["float_precision"] = c.normalization.float_precision;
  j["row_order"] = c.normalization.row_order == RowOrder::insensitive ? "insensitive" : "sensitive";
  j["bag_semantics"] = c.normalization.bag == BagSemantics::set ? "set" : "multiset";
  j["exec_timeout_ms"] = c.normalization.timeout.count();
  j["jobs"] = c.jobs;
  j["dry_run"] = c.dry_run;
  j["trials"] = c.trials;
  j["generator"] = {{"k_min", c.generator.k_min},
                    {"k_max", c.generator.k_max},
                    {"min_size", c.generator.min_size},
                    {"max_size", c.generator.max_size},
                    {"gold_largest_prob", c.generator.gold_largest_prob},
                    {"gold_present_prob", c.generator.gold_present_prob}};
  return j;
}

JudgeBackendConfig judge_backend_config(const RunConfig& c) {
  JudgeBackendConfig b;
  b.kind = c.judge;
  b.seed = c.seed;
  b.accuracy = c.judge_accuracy.empty() ? 1.0 : c.judge_accuracy.front();
  b.cached = judge_cache_enabled(c);
  if (b.cached) b.cache_dir = cache_dir_of(c);
  b.remote.base_url = c.judge_url;
  b.remote.model = c.judge_model;
  b.remote.retries = c.judge_retries;
  b.remote.max_tokens = c.judge_max_tokens;
  if (const char* token = std::getenv("JUDGE_API_TOKEN")) b.remote.api_token = token;
  return b;
}

namespace {

void report_error(std::ostream& err, std::string_view kind, const std::string& message) {
  ojson j;
  j["error"] = std::string(kind);
  j["message"] = message;
  err << j.dump() << std::endl;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
  } catch (const std::exception& e) {
    report_error(err, "internal_error", e.what());
  }
  return 2;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

void prepare_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create output directory " + c.out.string() + ": " + ec.message());
  write_text(c.out / "config.json", config_to_json(c).dump(2) + "\n");
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("missing --") + what);
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
}

bool needs_judge(const RunConfig& c) {
  for (auto s : c.strategies) {
    if (s != Strategy::sc) return true;
  }
  return false;
}

// Loaded and cross-checked inputs of a run. Built before any judge call.
struct Workspace {
  std::vector<Question> questions;
  PoolMap pools;
  std::map<std::string, SchemaSnapshot> schemas;
};

Workspace load_workspace(const RunConfig& c, bool require_gold) {
  require_file(c.dataset, "dataset");
  require_file(c.candidates, "candidates");
  if (c.db_root.empty()) throw ConfigError("missing --db-root");
  if (!fs::is_directory(c.db_root)) throw ConfigError("database root not found: " + c.db_root.string());
  if (c.strategies.empty()) throw ConfigError("no strategy selected");
  if (c.jobs == 0) throw ConfigError("--jobs must be at least 1");

  Workspace ws;
  ws.questions = load_dataset(c.dataset);
  ws.pools = load_candidates(c.candidates);
  std::vector<std::string> problems;
  for (const auto& [qid, pool] : ws.pools) {
    bool known = false;
    for (const auto& q : ws.questions) known = known || q.id == qid;
    if (!known) problems.push_back("candidate pool for unknown question '" + qid + "'");
  }
  if (!require_gold) {
    for (const auto& q : ws.questions) {
      if (!ws.pools.contains(q.id)) problems.push_back("question '" + q.id + "' has no candidate pool");
    }
  }
  auto db_problems = validate_databases(ws.questions, c.db_root);
  problems.insert(problems.end(), db_problems.begin(), db_problems.end());
  if (!problems.empty()) throw ConfigError(problems.front());

  for (const auto& q : ws.questions) {
    if (!ws.schemas.contains(q.db_id)) {
      ws.schemas.emplace(q.db_id, load_schema(database_path(c.db_root, q.db_id)));
    }
  }
  return ws;
}

struct ExecutedQuestion {
  std::vector<OutcomePtr> outcomes;
  OutcomePtr gold;
};

ExecutedQuestion execute_question(const RunConfig& c, const Question& q, const CandidatePool* pool) {
  ExecutedQuestion ex;
  Database db(database_path(c.db_root, q.db_id));
  if (pool) {
    for (const auto& cand : pool->candidates) {
      ex.outcomes.push_back(std::make_shared<const ExecutionOutcome>(execute_sql(db, cand.sql, c.normalization)));
    }
  }
  if (q.gold_sql) {
    ex.gold = std::make_shared<const ExecutionOutcome>(execute_sql(db, *q.gold_sql, c.normalization));
  }
  return ex;
}

}  // namespace

int cmd_select(const RunConfig& c, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const Workspace ws = load_workspace(c, /*require_gold=*/false);
    std::shared_ptr<Judge> judge;
    if (needs_judge(c)) {
      if (c.judge != JudgeKind::remote) {
        for (const auto& q : ws.questions) {
          if (!q.gold_sql) {
            throw ConfigError("oracle judges need gold SQL; question '" + q.id + "' has none");
          }
        }
      }
      auto backend = judge_backend_config(c);
      if (c.dry_run) backend.cached = false;  // no cache directory side effects
      judge = make_judge(backend);
    }
    prepare_out_dir(c);
    if (c.dry_run) {
      log << "dry run: " << ws.questions.size() << " questions, " << c.strategies.size()
          << " strategies, configuration valid\n";
      return 0;
    }

    // [question][strategy]
    std::vector<std::vector<EvaluatedSelection>> results(ws.questions.size());
    parallel_for(ws.questions.size(), c.jobs, [&](std::size_t qi) {
      const Question& q = ws.questions[qi];
      const CandidatePool& pool = ws.pools.at(q.id);
      const ExecutedQuestion ex = execute_question(c, q, &pool);
      for (Strategy s : c.strategies) {
        SelectionOptions opts;
        opts.strategy = s;
        opts.prompt_template = c.prompt_template;
        opts.parse_failure = c.parse_failure;
        opts.proxy = c.proxy;
        opts.proxy_seed = c.seed;
        EvaluatedSelection item;
        item.selection = select(q, pool, ex.outcomes, ws.schemas.at(q.db_id), ex.gold, judge.get(), opts);
        item.difficulty = q.difficulty;
        item.selected_outcome = ex.outcomes.at(item.selection.selected_candidate_index);
        item.gold = ex.gold;
        results[qi].push_back(std::move(item));
      }
    });

    std::string lines;
    bool any_gold = false;
    std::vector<EvaluatedSelection> flat;
    for (auto& per_q : results) {
      for (auto& item : per_q) {
        ojson j;
        j["question_id"] = item.selection.question_id;
        j["strategy"] = std::string(to_string(item.selection.strategy));
        j["selected_sql"] = item.selection.selected_sql;
        j["selected_candidate_index"] = item.selection.selected_candidate_index;
        j["winner_cluster"] = item.selection.winner_cluster ? ojson(*item.selection.winner_cluster) : ojson(nullptr);
        j["judgment_count"] = item.selection.judgment_count();
        j["unexecutable"] = item.selection.unexecutable;
        lines += j.dump() + "\n";
        any_gold = any_gold || item.gold != nullptr;
        flat.push_back(item);
      }
    }
    write_text(c.out / "selections.jsonl", lines);

    if (any_gold) {
      std::vector<EvalSummary> summaries;
      for (std::size_t si = 0; si < c.strategies.size(); ++si) {
        std::vector<EvaluatedSelection> items;
        for (const auto& per_q : results) items.push_back(per_q[si]);
        summaries.push_back(summarize(c.strategies[si], items));
        const auto& s = summaries.back();
        log << to_string(s.strategy) << ": EX "
            << (s.ex_percent ? format_percent(*s.ex_percent) : std::string("n/a"))
            << ", avg judgments " << s.avg_judgments << "\n";
      }
      emit_report(summaries, flat, c.out / "report.json");
    }
    return 0;
  });
}

int cmd_prefpairs(const RunConfig& c, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const Workspace ws = load_workspace(c, /*require_gold=*/true);
    prepare_out_dir(c);
    if (c.dry_run) {
      log << "dry run: " << ws.questions.size() << " questions, configuration valid\n";
      return 0;
    }

    struct Built {
      std::string question_id;
      PreferenceBuild build;
    };
    std::vector<Built> built(ws.questions.size());
    parallel_for(ws.questions.size(), c.jobs, [&](std::size_t qi) {
      const Question& q = ws.questions[qi];
      built[qi].question_id = q.id;
      auto it = ws.pools.find(q.id);
      if (it == ws.pools.end()) {
        built[qi].build.skip_reason = "no candidate pool";
        return;
      }
      if (!q.gold_sql) {
        built[qi].build.skip_reason = "no gold SQL";
        return;
      }
      const ExecutedQuestion ex = execute_question(c, q, &it->second);
      built[qi].build = build_preference_pairs(q, it->second, ex.outcomes, *ex.gold, ws.schemas.at(q.db_id));
    });
    std::sort(built.begin(), built.end(),
              [](const Built& a, const Built& b) { return a.question_id < b.question_id; });

    std::vector<PreferencePair> pairs;
    std::string skipped;
    for (auto& b : built) {
      if (b.build.skip_reason) {
        ojson j;
        j["question_id"] = b.question_id;
        j["reason"] = *b.build.skip_reason;
        skipped += j.dump() + "\n";
      }
      for (auto& p : b.build.pairs) pairs.push_back(std::move(p));
    }
    const std::size_t n = export_pairs(pairs, c.out / "preference_pairs.jsonl");
    write_text(c.out / "skipped.jsonl", skipped);
    log << "exported " << n << " preference records\n";
    return 0;
  });
}

int cmd_simulate(const RunConfig& c, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (c.strategies.empty()) throw ConfigError("no strategy selected");
    if (c.judge_accuracy.empty()) throw ConfigError("no judge accuracy given");
    SimulationConfig sim;
    sim.accuracies = c.judge_accuracy;
    sim.trials = c.trials;
    sim.seed = c.seed;
    sim.strategies = c.strategies;
    sim.generator = c.generator;
    sim.jobs = c.jobs;
    prepare_out_dir(c);
    if (c.dry_run) return 0;
    const auto rows = simulate(sim);
    write_simulation_csv(rows, c.out / "simulation.csv");
    log << "wrote " << rows.size() << " rows to " << (c.out / "simulation.csv").string() << "\n";
    return 0;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Execution-consistent candidate selection for text-to-SQL"};
  app.require_subcommand(1);
  RunConfig c;
  std::vector<std::string> strategies;
  std::string judge = "oracle", tmpl = "rjudge", parse_failure = "strict", proxy = "first";
  std::string row_order = "insensitive", bag = "set";
  long long timeout_ms = c.normalization.timeout.count();
  bool no_cache = false, cache = false;
  std::string cache_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--strategy", strategies, "sc|ct|drt|wct (repeatable)")
        ->check(CLI::IsMember({"sc", "ct", "drt", "wct"}));
    sub->add_option("--judge", judge, "Judge backend")->check(CLI::IsMember({"remote", "oracle", "noisy"}));
    sub->add_option("--judge-accuracy", c.judge_accuracy, "Noisy judge accuracy (repeatable for simulate)");
    sub->add_option("--seed", c.seed, "Run seed");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--jobs", c.jobs, "Concurrency limit");
    sub->add_flag("--dry-run", c.dry_run, "Validate configuration only");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--dataset", c.dataset, "Dataset JSONL");
    sub->add_option("--candidates", c.candidates, "Candidate JSONL");
    sub->add_option("--db-root", c.db_root, "Root of <db_id>/<db_id>.sqlite");
    sub->add_option("--judge-url", c.judge_url, "Chat-completions base URL");
    sub->add_option("--judge-model", c.judge_model, "Judge model name");
    sub->add_option("--judge-retries", c.judge_retries, "Retries on transport errors");
    sub->add_option("--judge-max-tokens", c.judge_max_tokens, "Max response tokens");
    sub->add_option("--template", tmpl, "Prompt template")->check(CLI::IsMember({"pjudge", "rjudge"}));
    sub->add_option("--parse-failure", parse_failure, "Parse-failure policy")
        ->check(CLI::IsMember({"strict", "abstain"}));
    sub->add_option("--proxy", proxy, "Proxy policy")->check(CLI::IsMember({"first", "random"}));
    sub->add_option("--float-precision", c.normalization.float_precision, "Decimal places for reals");
    sub->add_option("--row-order", row_order, "Row order")->check(CLI::IsMember({"insensitive", "sensitive"}));
    sub->add_option("--bag-semantics", bag, "Row multiplicity")->check(CLI::IsMember({"set", "multiset"}));
    sub->add_option("--exec-timeout-ms", timeout_ms, "Per-query timeout");
    sub->add_option("--cache-dir", cache_dir, "Judge cache directory");
    sub->add_flag("--cache", cache, "Force the judge cache on");
    sub->add_flag("--no-cache", no_cache, "Disable the judge cache");
  };

  auto* select_cmd = app.add_subcommand("select", "Select one SQL per question");
  add_common(select_cmd);
  add_data(select_cmd);
  auto* pref_cmd = app.add_subcommand("prefpairs", "Export judge-training preference pairs");
  add_common(pref_cmd);
  add_data(pref_cmd);
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo comparison with a noisy judge");
  add_common(sim_cmd);
  sim_cmd->add_option("--trials", c.trials, "Synthetic pools");
  sim_cmd->add_option("--k-min", c.generator.k_min, "Minimum clusters per pool");
  sim_cmd->add_option("--k-max", c.generator.k_max, "Maximum clusters per pool");
  sim_cmd->add_option("--min-size", c.generator.min_size, "Minimum cluster size");
  sim_cmd->add_option("--max-size", c.generator.max_size, "Maximum cluster size");
  sim_cmd->add_option("--gold-largest-prob", c.generator.gold_largest_prob, "P(gold cluster is largest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage_error", e.what());
    return 2;
  }

  c.strategies.clear();
  for (const auto& s : strategies) c.strategies.push_back(*parse_strategy(s));
  if (c.strategies.empty()) {
    if (sim_cmd->parsed()) {
      c.strategies = {Strategy::sc, Strategy::ct, Strategy::drt, Strategy::wct};
    } else {
      c.strategies = {Strategy::wct};
    }
  }
  c.judge = judge == "remote" ? JudgeKind::remote : judge == "noisy" ? JudgeKind::noisy_oracle : JudgeKind::oracle;
  c.prompt_template = tmpl == "pjudge" ? PromptTemplate::pjudge : PromptTemplate::rjudge;
  c.parse_failure = parse_failure == "abstain" ? ParseFailurePolicy::abstain : ParseFailurePolicy::strict;
  c.proxy = proxy == "random" ? ProxyPolicy::seeded_random : ProxyPolicy::first_index;
  c.normalization.row_order = row_order == "sensitive" ? RowOrder::sensitive : RowOrder::insensitive;
  c.normalization.bag = bag == "multiset" ? BagSemantics::multiset : BagSemantics::set;
  c.normalization.timeout = std::chrono::milliseconds(timeout_ms);
  if (no_cache) c.judge_cache = false;
  if (cache) c.judge_cache = true;
  if (!cache_dir.empty()) c.cache_dir = fs::path(cache_dir);
  if (timeout_ms <= 0) {
    report_error(err, "config_error", "--exec-timeout-ms must be positive");
    return 2;
  }

  if (select_cmd->parsed()) return cmd_select(c, log, err);
  if (pref_cmd->parsed()) return cmd_prefpairs(c, log, err);
  return cmd_simulate(c, log, err);
}

}  // namespace sqlsel
