#include "support/fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sqlsel::testing {

namespace fs = std::filesystem;

fs::path fixture_db_root() { return SQLSEL_FIXTURE_DB_ROOT; }
fs::path fixture_data_dir() { return fs::path(SQLSEL_DATA_DIR) / "fixture"; }
fs::path fixture_db(const std::string& db_id) { return database_path(fixture_db_root(), db_id); }

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    path_ = fs::temp_directory_path() / ("sqlsel-test-" + std::to_string(rd()));
    if (fs::create_directory(path_)) return;
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OutcomePtr ok_outcome(const Rows& rows, std::size_t columns) {
  return std::make_shared<const ExecutionOutcome>(make_ok_outcome(rows, columns));
}

OutcomePtr error_outcome(const std::string& message) {
  return std::make_shared<const ExecutionOutcome>(make_error_outcome(message));
}

OutcomePtr scalar(std::int64_t v) { return ok_outcome({{v}}); }

CandidatePool make_pool(const std::string& qid, const std::vector<std::string>& sqls) {
  CandidatePool pool;
  pool.question_id = qid;
  for (std::size_t i = 0; i < sqls.size(); ++i) pool.candidates.push_back({i, sqls[i], std::nullopt});
  return pool;
}

std::vector<FixtureQuestion> load_fixture_set() {
  const auto questions = load_dataset(fixture_data_dir() / "dataset.jsonl");
  const auto pools = load_candidates(fixture_data_dir() / "candidates.jsonl");
  std::vector<FixtureQuestion> out;
  for (const auto& q : questions) {
    FixtureQuestion fq;
    fq.question = q;
    fq.pool = pools.at(q.id);
    Database db(fixture_db(q.db_id));
    for (const auto& c : fq.pool.candidates) {
      fq.outcomes.push_back(std::make_shared<const ExecutionOutcome>(execute_sql(db, c.sql)));
    }
    fq.gold = std::make_shared<const ExecutionOutcome>(execute_sql(db, *q.gold_sql));
    fq.schema = load_schema(fixture_db(q.db_id));
    out.push_back(std::move(fq));
  }
  return out;
}

JudgmentOutcome FnJudge::judge(const JudgmentRequest& req) {
  ++calls_;
  JudgmentOutcome out;
  out.winner = fn_(req);
  out.raw_response = "<think>stub</think><answer>" + std::string(to_string(out.winner)) + "</answer>";
  out.format_ok = out.winner != Verdict::parse_failure;
  out.backend_tag = tag();
  return out;
}

}  // namespace sqlsel::testing
