#include "sqlsel/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "sqlsel/error.hpp"
#include "sqlsel/sqlite_db.hpp"
#include "sqlsel/text.hpp"

namespace sqlsel {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Difficulty d) noexcept {
  switch (d) {
    case Difficulty::simple: return "simple";
    case Difficulty::moderate: return "moderate";
    case Difficulty::challenging: return "challenging";
  }
  return "simple";
}

std::optional<Difficulty> parse_difficulty(std::string_view s) noexcept {
  if (s == "simple") return Difficulty::simple;
  if (s == "moderate") return Difficulty::moderate;
  if (s == "challenging") return Difficulty::challenging;
  return std::nullopt;
}

const TableInfo* SchemaSnapshot::find(std::string_view name) const noexcept {
  for (const auto& t : tables) {
    if (iequals(t.name, name)) return &t;
  }
  return nullptr;
}

namespace {

// A parsed JSON record together with a human-readable location.
struct Record {
  std::string where;
  json value;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Record> read_records(const fs::path& path, bool allow_array) {
  const std::string content = read_file(path);
  std::vector<Record> out;
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out;

  if (allow_array && content[first] == '[') {
    json arr;
    try {
      arr = json::parse(content);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": invalid JSON array: " + e.what());
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back({path.string() + ": element " + std::to_string(i), std::move(arr[i])});
    }
    return out;
  }

  std::istringstream lines(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ": line " + std::to_string(lineno);
    try {
      out.push_back({where, json::parse(line)});
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": invalid JSON: " + e.what());
    }
  }
  return out;
}

const json& require_field(const Record& rec, const char* field) {
  if (!rec.value.is_object()) throw ParseError(rec.where + ": record is not an object");
  auto it = rec.value.find(field);
  if (it == rec.value.end() || it->is_null()) {
    throw ParseError(rec.where + ": missing field '" + field + "'");
  }
  return *it;
}

std::string require_string(const Record& rec, const char* field) {
  const json& v = require_field(rec, field);
  if (!v.is_string()) throw ParseError(rec.where + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const Record& rec, const char* field) {
  auto it = rec.value.find(field);
  if (it == rec.value.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(rec.where + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<Question> load_dataset(const fs::path& path) {
  std::vector<Question> out;
  std::set<std::string> seen;
  for (const Record& rec : read_records(path, /*allow_array=*/true)) {
    Question q;
    const json& id = require_field(rec, "id");
    if (id.is_string()) {
      q.id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      q.id = std::to_string(id.get<long long>());
    } else {
      throw ParseError(rec.where + ": field 'id' must be a string");
    }
    q.text = require_string(rec, "question");
    q.evidence = optional_string(rec, "evidence").value_or("");
    q.db_id = require_string(rec, "db_id");
    q.gold_sql = optional_string(rec, "gold_sql");
    if (auto d = optional_string(rec, "difficulty")) {
      q.difficulty = parse_difficulty(*d);
      if (!q.difficulty) {
        throw ParseError(rec.where + ": field 'difficulty' has unknown value '" + *d + "'");
      }
    }
    if (!seen.insert(q.id).second) {
      throw ParseError(rec.where + ": duplicate question id '" + q.id + "'");
    }
    out.push_back(std::move(q));
  }
  return out;
}

PoolMap load_candidates(const fs::path& path) {
  PoolMap out;
  for (const Record& rec : read_records(path, /*allow_array=*/false)) {
    CandidatePool pool;
    pool.question_id = require_string(rec, "question_id");
    const json& list = require_field(rec, "candidates");
    if (!list.is_array()) throw ParseError(rec.where + ": field 'candidates' must be an array");
    if (list.empty()) {
      throw ParseError(rec.where + ": empty candidate list for question '" + pool.question_id + "'");
    }
    const auto tag = optional_string(rec, "generator_tag");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string()) {
        throw ParseError(rec.where + ": field 'candidates[" + std::to_string(i) + "]' must be a string");
      }
      std::string sql = list[i].get<std::string>();
      if (trim(sql).empty()) {
        throw ParseError(rec.where + ": field 'candidates[" + std::to_string(i) + "]' is blank");
      }
      pool.candidates.push_back({i, std::move(sql), tag});
    }
    const std::string qid = pool.question_id;
    if (!out.emplace(qid, std::move(pool)).second) {
      throw ParseError(rec.where + ": duplicate record for question '" + qid + "'");
    }
  }
  return out;
}

void export_candidates(const PoolMap& pools, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [qid, pool] : pools) {
    json rec = json::object();
    rec["question_id"] = qid;
    json list = json::array();
    for (const auto& c : pool.candidates) list.push_back(c.sql);
    rec["candidates"] = std::move(list);
    const auto& tag = pool.candidates.empty() ? std::nullopt : pool.candidates.front().generator_tag;
    rec["generator_tag"] = tag ? json(*tag) : json(nullptr);
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SchemaSnapshot load_schema(const fs::path& db_path) {
  Database db(db_path);
  SchemaSnapshot snap;
  snap.db_id = db_path.stem().string();

  auto prepare = [&](const std::string& sql) {
    sqlite3_stmt* raw = nullptr;
    if (sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &raw, nullptr) != SQLITE_OK) {
      throw IoError(db_path.string() + ": " + sqlite3_errmsg(db.handle()));
    }
    return Statement(raw);
  };
  auto text = [](sqlite3_stmt* s, int col) {
    const auto* p = sqlite3_column_text(s, col);
    return p ? std::string(reinterpret_cast<const char*>(p)) : std::string();
  };
  auto step = [&](sqlite3_stmt* s) {
    const int rc = sqlite3_step(s);
    if (rc != SQLITE_ROW && rc != SQLITE_DONE) {
      throw IoError(db_path.string() + ": " + sqlite3_errmsg(db.handle()));
    }
    return rc == SQLITE_ROW;
  };

  {
    auto stmt = prepare(
        "SELECT name, sql FROM sqlite_master "
        "WHERE type = 'table' AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' ORDER BY rowid");
    while (step(stmt.get())) {
      TableInfo t;
      t.name = text(stmt.get(), 0);
      t.ddl = text(stmt.get(), 1);
      snap.tables.push_back(std::move(t));
    }
  }

  for (auto& t : snap.tables) {
    std::vector<std::pair<int, std::string>> pk;
    auto info = prepare("PRAGMA table_info(" + quote_identifier(t.name) + ")");
    while (step(info.get())) {
      t.columns.push_back({text(info.get(), 1), text(info.get(), 2)});
      if (const int pos = sqlite3_column_int(info.get(), 5); pos > 0) {
        pk.emplace_back(pos, text(info.get(), 1));
      }
    }
    std::sort(pk.begin(), pk.end());
    for (auto& [pos, name] : pk) t.primary_key.push_back(std::move(name));

    auto fks = prepare("PRAGMA foreign_key_list(" + quote_identifier(t.name) + ")");
    int current_id = -1;
    while (step(fks.get())) {
      const int id = sqlite3_column_int(fks.get(), 0);
      if (id != current_id) {
        t.foreign_keys.push_back({{}, text(fks.get(), 2), {}});
        current_id = id;
      }
      t.foreign_keys.back().from_columns.push_back(text(fks.get(), 3));
      t.foreign_keys.back().to_columns.push_back(text(fks.get(), 4));
    }
  }

  for (auto& t : snap.tables) {
    std::erase_if(t.foreign_keys, [&](const ForeignKey& fk) {
      if (snap.find(fk.target_table)) return false;
      snap.warnings.push_back("table '" + t.name + "' references missing table '" +
                              fk.target_table + "'");
      return true;
    });
  }

  std::set<std::string> names;
  for (const auto& t : snap.tables) {
    if (!names.insert(to_lower(t.name)).second) {
      throw IoError(db_path.string() + ": duplicate table name '" + t.name + "'");
    }
  }
  return snap;
}

fs::path database_path(const fs::path& root, std::string_view db_id) {
  const std::string id(db_id);
  return root / id / (id + ".sqlite");
}

std::vector<std::string> validate_references(const std::vector<Question>& questions,
                                             const PoolMap& pools) {
  std::set<std::string> ids;
  for (const auto& q : questions) ids.insert(q.id);
  std::vector<std::string> problems;
  for (const auto& [qid, pool] : pools) {
    if (!ids.contains(qid)) problems.push_back("candidate pool for unknown question '" + qid + "'");
  }
  for (const auto& q : questions) {
    if (!pools.contains(q.id)) problems.push_back("question '" + q.id + "' has no candidate pool");
  }
  return problems;
}

std::vector<std::string> validate_databases(const std::vector<Question>& questions,
                                            const fs::path& db_root) {
  std::vector<std::string> problems;
  if (!fs::is_directory(db_root)) {
    problems.push_back("database root is not a directory: " + db_root.string());
    return problems;
  }
  std::set<std::string> checked;
  for (const auto& q : questions) {
    if (!checked.insert(q.db_id).second) continue;
    const auto p = database_path(db_root, q.db_id);
    if (!fs::is_regular_file(p)) problems.push_back("missing database file: " + p.string());
  }
  return problems;
}

}  // namespace sqlsel
