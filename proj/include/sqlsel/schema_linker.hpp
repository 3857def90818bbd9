#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sqlsel/dataset.hpp"

namespace sqlsel {

// Schema shown to a judge for one comparison: the tables either SQL touches.
struct SchemaUnion {
  std::string db_id;
  std::vector<std::string> table_names;  // catalog order
  std::string ddl_text;
  bool fallback_used = false;
};

// Tables named in FROM/JOIN clauses anywhere in `sql` (subqueries and CTE
// bodies included, CTE names excluded), resolved case-insensitively against
// `snapshot` and returned under their catalog spelling. Names that do not
// resolve are dropped. Returns nullopt when the text cannot be parsed.
std::optional<std::set<std::string>> extract_referenced_tables(std::string_view sql,
                                                               const SchemaSnapshot& snapshot);

// Union of the tables of both SQLs. If either fails to parse, every table
// of the snapshot is used and fallback_used is set.
SchemaUnion build_union_schema(const SchemaSnapshot& snapshot, std::string_view sql_a,
                               std::string_view sql_b);

// CREATE statements of `tables` (catalog order), each terminated by ';'.
std::string render_ddl(const SchemaSnapshot& snapshot, const std::set<std::string>& tables);

}  // namespace sqlsel
