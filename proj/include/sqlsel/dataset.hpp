#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqlsel {

enum class Difficulty { simple, moderate, challenging };

std::string_view to_string(Difficulty d) noexcept;
std::optional<Difficulty> parse_difficulty(std::string_view s) noexcept;

// One benchmark item.
struct Question {
  std::string id;
  std::string text;
  std::string evidence;
  std::string db_id;
  std::optional<std::string> gold_sql;
  std::optional<Difficulty> difficulty;
};

struct CandidateSql {
  std::size_t index = 0;
  std::string sql;
  std::optional<std::string> generator_tag;
};

// Sampled candidates for one question, in sampling order. The order is
// authoritative for every deterministic tie-break downstream.
struct CandidatePool {
  std::string question_id;
  std::vector<CandidateSql> candidates;

  std::size_t size() const noexcept { return candidates.size(); }
};

using PoolMap = std::map<std::string, CandidatePool>;

struct ColumnInfo {
  std::string name;
  std::string type;

  bool operator==(const ColumnInfo&) const = default;
};

struct ForeignKey {
  std::vector<std::string> from_columns;
  std::string target_table;
  std::vector<std::string> to_columns;

  bool operator==(const ForeignKey&) const = default;
};

struct TableInfo {
  std::string name;
  std::vector<ColumnInfo> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;
  std::string ddl;

  bool operator==(const TableInfo&) const = default;
};

// User tables of one database in catalog order. Views and sqlite_* internal
// tables are not included.
struct SchemaSnapshot {
  std::string db_id;
  std::vector<TableInfo> tables;
  // Foreign keys whose target table does not exist; dropped from `tables`.
  std::vector<std::string> warnings;

  // Case-insensitive lookup; nullptr if absent.
  const TableInfo* find(std::string_view name) const noexcept;

  bool operator==(const SchemaSnapshot&) const = default;
};

// Reads a dataset file: line-delimited JSON objects or one JSON array.
// Throws ParseError naming the line (or array element) and the field.
std::vector<Question> load_dataset(const std::filesystem::path& path);

// Reads a candidate file (line-delimited JSON). Duplicate SQL strings in one
// pool are kept; duplicate question ids across records are an error.
PoolMap load_candidates(const std::filesystem::path& path);

// Writes pools in the candidate file format, ordered by question id.
void export_candidates(const PoolMap& pools, const std::filesystem::path& path);

// Reads the schema catalog of a SQLite file.
SchemaSnapshot load_schema(const std::filesystem::path& db_path);

// `<root>/<db_id>/<db_id>.sqlite`
std::filesystem::path database_path(const std::filesystem::path& root, std::string_view db_id);

// Referential checks between a dataset, its candidate pools and a database
// root. Returns one message per problem; empty means consistent.
std::vector<std::string> validate_references(const std::vector<Question>& questions,
                                             const PoolMap& pools);
std::vector<std::string> validate_databases(const std::vector<Question>& questions,
                                            const std::filesystem::path& db_root);

}  // namespace sqlsel
