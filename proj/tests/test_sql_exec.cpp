#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sqlsel/sql_exec.hpp"
#include "support/fixtures.hpp"

namespace sqlsel {
namespace {

using testing::fixture_db;

const char* kCandidateB =
    "SELECT SUM(CASE WHEN isNonFoilOnly = 1 THEN 1 ELSE 0 END) * 100.0 / COUNT(*) AS percentage_non_foil "
    "FROM sets WHERE code IN (SELECT setCode FROM set_translations WHERE language = 'Japanese')";
const char* kCandidateA =
    "SELECT CAST(SUM(CASE WHEN T2.isNonFoilOnly = 1 THEN 1 ELSE 0 END) AS REAL) * 100 / "
    "SUM(T1.language = 'Japanese') FROM set_translations AS T1 INNER JOIN sets AS T2 ON T1.setCode = "
    "T2.code INNER JOIN cards AS T3 ON T2.code = T3.setCode";

TEST(ExecuteSql, CardGamesCandidateB) {
  Database db(fixture_db("card_games"));
  const auto out = execute_sql(db, kCandidateB);
  ASSERT_TRUE(out.ok()) << out.error_message.value_or("");
  EXPECT_EQ(out.rendered, "[[11.570247933884298]]");
  ASSERT_EQ(out.result->rows.size(), 1u);
  EXPECT_DOUBLE_EQ(std::get<double>(out.result->rows[0][0]), 11.570248);
}

TEST(ExecuteSql, CardGamesCandidateA) {
  Database db(fixture_db("card_games"));
  const auto out = execute_sql(db, kCandidateA);
  ASSERT_TRUE(out.ok()) << out.error_message.value_or("");
  EXPECT_EQ(out.rendered, "[[153.8992408557626]]");
}

TEST(ExecuteSql, EmptyResultIsOk) {
  Database db(fixture_db("toy"));
  const auto out = execute_sql(db, "SELECT 1 WHERE 1=0");
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.result->column_count, 1u);
  EXPECT_EQ(out.result->row_count, 0u);
  EXPECT_EQ(out.rendered, "[]");
}

TEST(ExecuteSql, SyntaxError) {
  Database db(fixture_db("toy"));
  const auto out = execute_sql(db, "SELEC 1");
  EXPECT_EQ(out.status, ExecStatus::sql_error);
  ASSERT_TRUE(out.error_message.has_value());
  EXPECT_FALSE(out.error_message->empty());
  EXPECT_FALSE(out.result.has_value());
}

TEST(ExecuteSql, UnknownTable) {
  Database db(fixture_db("toy"));
  const auto out = execute_sql(db, "SELECT COUNT(*) FROM score");
  EXPECT_EQ(out.status, ExecStatus::sql_error);
  EXPECT_NE(out.error_message->find("no such table"), std::string::npos);
}

TEST(ExecuteSql, WritesRejectedAndDatabaseUntouched) {
  const auto path = fixture_db("toy");
  const auto before = testing::read_file(path);
  Database db(path);
  for (const char* sql : {"INSERT INTO students VALUES (9, 'Zed')", "UPDATE scores SET value = 0",
                          "DELETE FROM scores", "DROP TABLE students", "CREATE TABLE t (x)",
                          "SELECT 1; DELETE FROM scores"}) {
    const auto out = execute_sql(db, sql);
    EXPECT_EQ(out.status, ExecStatus::sql_error) << sql;
    EXPECT_TRUE(out.error_message.has_value()) << sql;
  }
  EXPECT_EQ(testing::read_file(path), before);
  EXPECT_EQ(execute_sql(db, "SELECT COUNT(*) FROM scores").rendered, "[[4]]");
}

TEST(ExecuteSql, Timeout) {
  Database db(fixture_db("toy"));
  NormalizationConfig cfg;
  cfg.timeout = std::chrono::milliseconds(50);
  const auto out = execute_sql(
      db, "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) SELECT MAX(x) FROM c", cfg);
  EXPECT_EQ(out.status, ExecStatus::timeout);
  EXPECT_TRUE(out.error_message.has_value());
}

TEST(ExecuteSql, TrailingSemicolonAllowed) {
  Database db(fixture_db("toy"));
  EXPECT_TRUE(execute_sql(db, "SELECT 1;  ").ok());
}

TEST(ExecuteSql, PreviewTruncated) {
  Database db(fixture_db("toy"));
  const auto out =
      execute_sql(db, "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c WHERE x < 12) SELECT x FROM c");
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.raw_row_count, 12u);
  EXPECT_EQ(out.result->row_count, 12u);
  EXPECT_EQ(out.rendered, "[[1], [2], [3], [4], [5], [6], [7], [8], [9], [10]]\n(showing first 10 of 12 rows)");
}

TEST(ExecuteSql, MixedCellsRender) {
  Database db(fixture_db("toy"));
  const auto out = execute_sql(db, "SELECT 1, 'it''s', NULL, 2.5");
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.rendered, "[[1, \"it's\", None, 2.5]]");
}

TEST(NormalizeResult, PermutationSymmetry) {
  const auto a = normalize_result({{1, 2.0}, {3, 4.0}}, 2);
  const auto b = normalize_result({{3, 4.0}, {1, 2.0}}, 2);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  EXPECT_TRUE(a.equivalent_to(b));
}

TEST(NormalizeResult, SixDecimalRounding) {
  const auto a = normalize_result({{153.8992408557626}}, 1);
  const auto b = normalize_result({{153.899241}}, 1);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  // independent oracle for the rounded value
  EXPECT_EQ(std::round(153.8992408557626 * 1e6) / 1e6, 153.899241);
}

TEST(NormalizeResult, SetVersusMultiset) {
  const auto two = normalize_result({{std::int64_t{1}}, {std::int64_t{1}}}, 1);
  const auto one = normalize_result({{std::int64_t{1}}}, 1);
  EXPECT_EQ(two.fingerprint, one.fingerprint);
  NormalizationConfig multi;
  multi.bag = BagSemantics::multiset;
  EXPECT_NE(normalize_result({{std::int64_t{1}}, {std::int64_t{1}}}, 1, multi).fingerprint,
            normalize_result({{std::int64_t{1}}}, 1, multi).fingerprint);
}

TEST(NormalizeResult, OrderSensitiveMode) {
  NormalizationConfig cfg;
  cfg.row_order = RowOrder::sensitive;
  EXPECT_NE(normalize_result({{std::int64_t{1}}, {std::int64_t{2}}}, 1, cfg).fingerprint,
            normalize_result({{std::int64_t{2}}, {std::int64_t{1}}}, 1, cfg).fingerprint);
}

TEST(NormalizeResult, RaggedRowsRejected) {
  EXPECT_THROW(normalize_result({{std::int64_t{1}}, {std::int64_t{1}, std::int64_t{2}}}, 1), std::invalid_argument);
}

TEST(NormalizeResult, NonFiniteBecomesNull) {
  const auto r = normalize_result({{std::numeric_limits<double>::quiet_NaN()}}, 1);
  EXPECT_TRUE(r.non_finite_coerced);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(r.rows[0][0]));
  EXPECT_EQ(r.fingerprint, normalize_result({{std::monostate{}}}, 1).fingerprint);
}

TEST(NormalizeResult, BlobDigested) {
  const auto r = normalize_result({{Blob{"abc"}}}, 1);
  ASSERT_TRUE(std::holds_alternative<BlobDigest>(r.rows[0][0]));
  EXPECT_EQ(std::get<BlobDigest>(r.rows[0][0]).sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(NormalizeResult, IntegralRealMatchesInteger) {
  EXPECT_EQ(normalize_result({{11.0}}, 1).fingerprint, normalize_result({{std::int64_t{11}}}, 1).fingerprint);
  EXPECT_NE(normalize_result({{std::string("11")}}, 1).fingerprint,
            normalize_result({{std::int64_t{11}}}, 1).fingerprint);
}

TEST(ResultsEquivalent, Examples) {
  const auto x = make_ok_outcome({{5.5}}, 1);
  EXPECT_TRUE(results_equivalent(x, make_ok_outcome({{5.5}}, 1)));
  EXPECT_FALSE(results_equivalent(make_ok_outcome({{153.899241}}, 1), make_ok_outcome({{11.570248}}, 1)));
  const auto e = make_error_outcome("boom");
  EXPECT_FALSE(results_equivalent(e, e));
  EXPECT_FALSE(results_equivalent(e, x));
  EXPECT_FALSE(results_equivalent(x, e));
}

TEST(PythonRepr, Floats) {
  EXPECT_EQ(python_float_repr(11.570247933884298), "11.570247933884298");
  EXPECT_EQ(python_float_repr(153.8992408557626), "153.8992408557626");
  EXPECT_EQ(python_float_repr(5.5), "5.5");
  EXPECT_EQ(python_float_repr(11.0), "11.0");
  EXPECT_EQ(python_float_repr(0.0001), "0.0001");
  EXPECT_EQ(python_float_repr(0.00001), "1e-05");
  EXPECT_EQ(python_float_repr(1e16), "1e+16");
  EXPECT_EQ(python_float_repr(-2.5), "-2.5");
  EXPECT_EQ(python_float_repr(0.1), "0.1");
}

// Random small result sets over a tiny value domain so collisions happen.
Rows random_rows(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nrows(0, 3), val(0, 2), kind(0, 2);
  Rows rows(nrows(rng));
  for (auto& r : rows) {
    const int v = val(rng);
    switch (kind(rng)) {
      case 0: r.push_back(std::int64_t{v}); break;
      case 1: r.push_back(v + 0.5); break;
      default: r.push_back(std::string(1, char('a' + v))); break;
    }
  }
  return rows;
}

TEST(Properties, EquivalenceRelation) {
  std::mt19937_64 rng(7);
  std::vector<ExecutionOutcome> xs;
  for (int i = 0; i < 60; ++i) xs.push_back(make_ok_outcome(random_rows(rng), 1));
  for (const auto& a : xs) {
    EXPECT_TRUE(results_equivalent(a, a));
    for (const auto& b : xs) {
      const bool ab = results_equivalent(a, b);
      EXPECT_EQ(ab, results_equivalent(b, a));
      // fingerprint equality iff canonical equality
      EXPECT_EQ(ab, a.result->fingerprint == b.result->fingerprint);
      EXPECT_EQ(ab, a.result->rows == b.result->rows);
      if (!ab) continue;
      for (const auto& c : xs) {
        if (results_equivalent(b, c)) {
          EXPECT_TRUE(results_equivalent(a, c));
        }
      }
    }
  }
}

TEST(Properties, NormalizeIdempotent) {
  std::mt19937_64 rng(11);
  for (const auto mode : {RowOrder::insensitive, RowOrder::sensitive}) {
    for (const auto bag : {BagSemantics::set, BagSemantics::multiset}) {
      NormalizationConfig cfg;
      cfg.row_order = mode;
      cfg.bag = bag;
      for (int i = 0; i < 200; ++i) {
        Rows raw = random_rows(rng);
        for (auto& r : raw) r.push_back(std::uniform_real_distribution<double>(-10, 10)(rng));
        const auto once = normalize_result(raw, 2, cfg);
        const auto twice = normalize_result(once.rows, 2, cfg);
        EXPECT_EQ(once.rows, twice.rows);
        EXPECT_EQ(once.fingerprint, twice.fingerprint);
      }
    }
  }
}

TEST(Properties, PermutationInvariance) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    Rows raw;
    for (int r = 0; r < 6; ++r) raw.push_back({std::int64_t(rng() % 4), std::uniform_real_distribution<double>(0, 1)(rng)});
    const auto base = normalize_result(raw, 2).fingerprint;
    for (int p = 0; p < 5; ++p) {
      std::shuffle(raw.begin(), raw.end(), rng);
      EXPECT_EQ(normalize_result(raw, 2).fingerprint, base);
    }
  }
}

}  // namespace
}  // namespace sqlsel
