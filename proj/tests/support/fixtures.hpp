#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sqlsel/dataset.hpp"
#include "sqlsel/judge.hpp"
#include "sqlsel/sql_exec.hpp"

namespace sqlsel::testing {

std::filesystem::path fixture_db_root();
std::filesystem::path fixture_data_dir();  // data/fixture
std::filesystem::path fixture_db(const std::string& db_id);

// Directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& p, const std::string& content);
std::string read_file(const std::filesystem::path& p);

OutcomePtr ok_outcome(const Rows& rows, std::size_t columns = 1);
OutcomePtr error_outcome(const std::string& message = "no such table");
// One-cell integer result.
OutcomePtr scalar(std::int64_t v);

CandidatePool make_pool(const std::string& qid, const std::vector<std::string>& sqls);

// A fixture question with its candidates and gold executed against the
// bundled database.
struct FixtureQuestion {
  Question question;
  CandidatePool pool;
  std::vector<OutcomePtr> outcomes;
  OutcomePtr gold;
  SchemaSnapshot schema;
};
std::vector<FixtureQuestion> load_fixture_set();

// Judge driven by a callback; counts calls.
class FnJudge : public Judge {
 public:
  explicit FnJudge(std::function<Verdict(const JudgmentRequest&)> fn) : fn_(std::move(fn)) {}
  JudgmentOutcome judge(const JudgmentRequest& req) override;
  std::string tag() const override { return "stub"; }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::function<Verdict(const JudgmentRequest&)> fn_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace sqlsel::testing
