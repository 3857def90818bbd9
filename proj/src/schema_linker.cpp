#include "sqlsel/schema_linker.hpp"

#include <array>
#include <cctype>

#include "sqlsel/text.hpp"

namespace sqlsel {

namespace {

enum class TokKind { word, quoted, string, number, punct };

struct Token {
  TokKind kind;
  std::string text;  // identifiers unquoted; punctuation as-is
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

// Returns nullopt on unterminated strings, identifiers or comments.
std::optional<std::vector<Token>> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto quoted_until = [&](char close, TokKind kind) -> bool {
    std::string text;
    ++i;
    while (i < n) {
      if (s[i] == close) {
        if (i + 1 < n && s[i + 1] == close && close != ']') {
          text.push_back(close);
          i += 2;
          continue;
        }
        ++i;
        out.push_back({kind, std::move(text)});
        return true;
      }
      text.push_back(s[i++]);
    }
    return false;
  };

  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (c == '-' && i + 1 < n && s[i + 1] == '-') {
      while (i < n && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      const auto end = s.find("*/", i + 2);
      if (end == std::string_view::npos) return std::nullopt;
      i = end + 2;
    } else if (c == '\'') {
      if (!quoted_until('\'', TokKind::string)) return std::nullopt;
    } else if (c == '"') {
      if (!quoted_until('"', TokKind::quoted)) return std::nullopt;
    } else if (c == '`') {
      if (!quoted_until('`', TokKind::quoted)) return std::nullopt;
    } else if (c == '[') {
      if (!quoted_until(']', TokKind::quoted)) return std::nullopt;
    } else if (is_ident_start(c)) {
      const std::size_t start = i;
      while (i < n && is_ident_char(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({TokKind::word, std::string(s.substr(start, i - start))});
    } else if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const std::size_t start = i;
      while (i < n && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      out.push_back({TokKind::number, std::string(s.substr(start, i - start))});
    } else {
      out.push_back({TokKind::punct, std::string(1, static_cast<char>(c))});
      ++i;
    }
  }
  return out;
}

// Words that end a table reference or cannot be an alias.
constexpr std::array kKeywords = {
    "ALL",     "AND",       "AS",      "ASC",    "BETWEEN", "BY",     "CASE",   "CROSS",
    "DESC",    "DISTINCT",  "ELSE",    "END",    "EXCEPT",  "EXISTS", "FROM",   "FULL",
    "GROUP",   "HAVING",    "IN",      "INDEXED", "INNER",  "INTERSECT", "IS",  "JOIN",
    "LEFT",    "LIKE",      "LIMIT",   "NATURAL", "NOT",    "NULL",   "OFFSET", "ON",
    "OR",      "ORDER",     "OUTER",   "RIGHT",  "SELECT",  "THEN",   "UNION",  "USING",
    "VALUES",  "WHEN",      "WHERE",   "WINDOW", "WITH",    "GLOB",   "REGEXP", "MATCH",
    "ESCAPE",  "COLLATE",   "RETURNING",
};

// Words that can never start a table reference.
constexpr std::array kClauseWords = {
    "SELECT", "WHERE", "GROUP",  "ORDER",   "LIMIT", "HAVING", "UNION", "INTERSECT", "EXCEPT",
    "ON",     "USING", "JOIN",   "INNER",   "LEFT",  "RIGHT",  "FULL",  "CROSS",     "NATURAL",
    "OUTER",  "FROM",  "VALUES", "WINDOW",  "AS",
};

template <std::size_t N>
bool in_list(const std::array<const char*, N>& list, std::string_view word) {
  for (const char* k : list) {
    if (iequals(k, word)) return true;
  }
  return false;
}

bool is_word(const Token& t, std::string_view w) { return t.kind == TokKind::word && iequals(t.text, w); }
bool is_punct(const Token& t, char c) { return t.kind == TokKind::punct && t.text[0] == c; }

class Extractor {
 public:
  explicit Extractor(std::vector<Token> toks) : toks_(std::move(toks)) {}

  // False on a structural error.
  bool run() {
    if (toks_.empty()) return false;
    if (!balanced()) return false;
    const Token& first = toks_.front();
    if (!(is_word(first, "SELECT") || is_word(first, "WITH") || is_word(first, "VALUES") ||
          is_punct(first, '('))) {
      return false;
    }
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (is_word(toks_[i], "WITH") && !collect_ctes(i + 1)) return false;
    }
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (is_word(toks_[i], "FROM")) {
        if (!table_list(i + 1, /*allow_comma=*/true)) return false;
      } else if (is_word(toks_[i], "JOIN")) {
        if (!table_list(i + 1, /*allow_comma=*/false)) return false;
      }
    }
    return true;
  }

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& ctes() const { return ctes_; }

 private:
  bool balanced() {
    int depth = 0;
    match_.assign(toks_.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (is_punct(toks_[i], '(')) {
        stack.push_back(i);
        ++depth;
      } else if (is_punct(toks_[i], ')')) {
        if (stack.empty()) return false;
        match_[stack.back()] = i;
        stack.pop_back();
        --depth;
      }
    }
    return depth == 0;
  }

  bool at(std::size_t i) const { return i < toks_.size(); }

  bool is_identifier(std::size_t i) const {
    return at(i) && (toks_[i].kind == TokKind::quoted ||
                     (toks_[i].kind == TokKind::word && !in_list(kKeywords, toks_[i].text)));
  }

  bool collect_ctes(std::size_t i) {
    if (at(i) && is_word(toks_[i], "RECURSIVE")) ++i;
    for (;;) {
      if (!at(i) || !(toks_[i].kind == TokKind::word || toks_[i].kind == TokKind::quoted)) return false;
      ctes_.push_back(toks_[i].text);
      ++i;
      if (at(i) && is_punct(toks_[i], '(')) i = match_[i] + 1;
      if (!at(i) || !is_word(toks_[i], "AS")) return false;
      ++i;
      if (at(i) && is_word(toks_[i], "NOT")) ++i;
      if (at(i) && is_word(toks_[i], "MATERIALIZED")) ++i;
      if (!at(i) || !is_punct(toks_[i], '(')) return false;
      i = match_[i] + 1;
      if (at(i) && is_punct(toks_[i], ',')) {
        ++i;
        continue;
      }
      return true;
    }
  }

  bool table_list(std::size_t i, bool allow_comma) {
    for (;;) {
      if (!at(i)) return false;
      const Token& t = toks_[i];
      if (is_punct(t, '(')) {
        i = match_[i] + 1;  // subquery or parenthesized join; scanned by the outer loop
      } else if (t.kind == TokKind::quoted ||
                 (t.kind == TokKind::word && !in_list(kClauseWords, t.text))) {
        std::string name = t.text;
        ++i;
        if (at(i + 1) && is_punct(toks_[i], '.') &&
            (toks_[i + 1].kind == TokKind::word || toks_[i + 1].kind == TokKind::quoted)) {
          name = toks_[i + 1].text;
          i += 2;
        }
        if (at(i) && is_punct(toks_[i], '(')) {
          i = match_[i] + 1;  // table-valued function
        } else {
          names_.push_back(std::move(name));
        }
      } else {
        return false;
      }
      if (at(i) && is_word(toks_[i], "AS")) {
        ++i;
        if (!at(i) || !(toks_[i].kind == TokKind::word || toks_[i].kind == TokKind::quoted)) return false;
        ++i;
      } else if (is_identifier(i)) {
        ++i;
      }
      if (allow_comma && at(i) && is_punct(toks_[i], ',')) {
        ++i;
        continue;
      }
      return true;
    }
  }

  std::vector<Token> toks_;
  std::vector<std::size_t> match_;
  std::vector<std::string> names_;
  std::vector<std::string> ctes_;
};

}  // namespace

std::optional<std::set<std::string>> extract_referenced_tables(std::string_view sql,
                                                               const SchemaSnapshot& snapshot) {
  auto toks = tokenize(sql);
  if (!toks) return std::nullopt;
  while (!toks->empty() && is_punct(toks->back(), ';')) toks->pop_back();
  Extractor ex(std::move(*toks));
  if (!ex.run()) return std::nullopt;

  std::set<std::string> out;
  for (const auto& name : ex.names()) {
    bool is_cte = false;
    for (const auto& cte : ex.ctes()) is_cte = is_cte || iequals(cte, name);
    if (is_cte) continue;
    if (const TableInfo* t = snapshot.find(name)) out.insert(t->name);
  }
  return out;
}

std::string render_ddl(const SchemaSnapshot& snapshot, const std::set<std::string>& tables) {
  std::string out;
  for (const auto& t : snapshot.tables) {
    if (!tables.contains(t.name)) continue;
    if (!out.empty()) out += "\n\n";
    out += std::string(trim(t.ddl));
    out += ";";
  }
  return out;
}

SchemaUnion build_union_schema(const SchemaSnapshot& snapshot, std::string_view sql_a,
                               std::string_view sql_b) {
  SchemaUnion u;
  u.db_id = snapshot.db_id;
  std::set<std::string> tables;
  const auto a = extract_referenced_tables(sql_a, snapshot);
  const auto b = a ? extract_referenced_tables(sql_b, snapshot) : std::nullopt;
  if (a && b) {
    tables = *a;
    tables.insert(b->begin(), b->end());
  } else {
    u.fallback_used = true;
    for (const auto& t : snapshot.tables) tables.insert(t.name);
  }
  for (const auto& t : snapshot.tables) {
    if (tables.contains(t.name)) u.table_names.push_back(t.name);
  }
  u.ddl_text = render_ddl(snapshot, tables);
  return u;
}

}  // namespace sqlsel
