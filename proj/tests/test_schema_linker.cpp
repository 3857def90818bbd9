#include <gtest/gtest.h>

#include <random>

#include "sqlsel/schema_linker.hpp"
#include "support/fixtures.hpp"

namespace sqlsel {
namespace {

using Tables = std::set<std::string>;

const std::string kCandidateA =
    "SELECT CAST(SUM(CASE WHEN T2.isNonFoilOnly = 1 THEN 1 ELSE 0 END) AS REAL) * 100 / "
    "SUM(T1.language = 'Japanese') FROM set_translations AS T1 INNER JOIN sets AS T2 ON T1.setCode = "
    "T2.code INNER JOIN cards AS T3 ON T2.code = T3.setCode";
const std::string kCandidateB =
    "SELECT SUM(CASE WHEN isNonFoilOnly = 1 THEN 1 ELSE 0 END) * 100.0 / COUNT(*) AS percentage_non_foil "
    "FROM sets WHERE code IN (SELECT setCode FROM set_translations WHERE language = 'Japanese')";

class SchemaLinker : public ::testing::Test {
 protected:
  SchemaSnapshot cards = load_schema(testing::fixture_db("card_games"));
  SchemaSnapshot toy = load_schema(testing::fixture_db("toy"));
};

TEST_F(SchemaLinker, CandidateAJoins) {
  EXPECT_EQ(extract_referenced_tables(kCandidateA, cards), (Tables{"set_translations", "sets", "cards"}));
}

TEST_F(SchemaLinker, NoFrom) { EXPECT_EQ(extract_referenced_tables("SELECT 1", cards), Tables{}); }

TEST_F(SchemaLinker, CandidateBSubquery) {
  EXPECT_EQ(extract_referenced_tables(kCandidateB, cards), (Tables{"sets", "set_translations"}));
}

TEST_F(SchemaLinker, CteNamesExcluded) {
  EXPECT_EQ(extract_referenced_tables(
                "WITH jp AS (SELECT setCode FROM set_translations WHERE language = 'Japanese') "
                "SELECT COUNT(*) FROM jp JOIN Sets s ON s.code = jp.setCode",
                cards),
            (Tables{"set_translations", "sets"}));
}

TEST_F(SchemaLinker, CommaJoinQuotedAndCaseInsensitive) {
  EXPECT_EQ(extract_referenced_tables("select * from \"STUDENTS\" a, `scores` b where a.id = b.student_id", toy),
            (Tables{"students", "scores"}));
  EXPECT_EQ(extract_referenced_tables("SELECT * FROM main.scores", toy), Tables{"scores"});
}

TEST_F(SchemaLinker, KeywordsInsideStringsIgnored) {
  EXPECT_EQ(extract_referenced_tables("SELECT 'from students' FROM scores -- join students\n", toy),
            Tables{"scores"});
}

TEST_F(SchemaLinker, UnknownNamesDropped) {
  EXPECT_EQ(extract_referenced_tables("SELECT COUNT(*) FROM score", toy), Tables{});
}

TEST_F(SchemaLinker, ParseFailures) {
  EXPECT_FALSE(extract_referenced_tables("SELECT (1", toy).has_value());
  EXPECT_FALSE(extract_referenced_tables("garbage text", toy).has_value());
  EXPECT_FALSE(extract_referenced_tables("SELECT * FROM", toy).has_value());
}

TEST_F(SchemaLinker, UnionOfCardGames) {
  const auto u = build_union_schema(cards, kCandidateA, kCandidateB);
  EXPECT_EQ(u.table_names, (std::vector<std::string>{"sets", "cards", "set_translations"}));
  EXPECT_FALSE(u.fallback_used);
  EXPECT_EQ(u.db_id, cards.db_id);
  EXPECT_LT(u.ddl_text.find("CREATE TABLE sets"), u.ddl_text.find("CREATE TABLE cards"));
}

TEST_F(SchemaLinker, UnionEmpty) {
  const auto u = build_union_schema(cards, "SELECT 1", "SELECT 1");
  EXPECT_TRUE(u.table_names.empty());
  EXPECT_TRUE(u.ddl_text.empty());
  EXPECT_FALSE(u.fallback_used);
}

TEST_F(SchemaLinker, FallbackOnParseFailure) {
  const auto u = build_union_schema(toy, "SELECT (", "SELECT 1");
  EXPECT_TRUE(u.fallback_used);
  EXPECT_EQ(u.table_names, (std::vector<std::string>{"students", "scores"}));
  Tables all{"students", "scores"};
  EXPECT_EQ(u.ddl_text, render_ddl(toy, all));
}

TEST_F(SchemaLinker, RenderDdlFormat) {
  const auto ddl = render_ddl(toy, {"scores", "students"});
  EXPECT_EQ(ddl.rfind("CREATE TABLE students", 0), 0u);
  EXPECT_NE(ddl.find(");\n\nCREATE TABLE scores"), std::string::npos);
  EXPECT_EQ(ddl.back(), ';');
}

TEST_F(SchemaLinker, UnionLaws) {
  const std::vector<std::string> pool{kCandidateA, kCandidateB, "SELECT 1", "SELECT * FROM cards",
                                      "SELECT name FROM sets s JOIN set_translations t ON s.code = t.setCode",
                                      "SELECT (", "WITH x AS (SELECT * FROM cards) SELECT * FROM x"};
  std::set<std::string> all;
  for (const auto& t : cards.tables) all.insert(t.name);
  for (const auto& a : pool) {
    for (const auto& b : pool) {
      const auto ab = build_union_schema(cards, a, b);
      const auto ba = build_union_schema(cards, b, a);
      EXPECT_EQ(ab.table_names, ba.table_names);
      const Tables u(ab.table_names.begin(), ab.table_names.end());
      for (const auto& t : u) EXPECT_TRUE(all.count(t)) << t;
      for (const auto& side : {a, b}) {
        if (auto ts = extract_referenced_tables(side, cards)) {
          for (const auto& t : *ts) EXPECT_TRUE(u.count(t)) << t;
        }
      }
    }
  }
}

}  // namespace
}  // namespace sqlsel
