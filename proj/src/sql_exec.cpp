#include "sqlsel/sql_exec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "sqlsel/error.hpp"
#include "sqlsel/hashing.hpp"
#include "sqlsel/text.hpp"

namespace sqlsel {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

Database::Database(const fs::path& path) : path_(path) {
  if (!fs::is_regular_file(path)) throw IoError("database file not found: " + path.string());
  sqlite3* raw = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX,
                                 nullptr);
  db_.reset(raw);
  if (rc != SQLITE_OK) {
    const std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
    throw IoError("cannot open " + path.string() + ": " + msg);
  }
  // Opening is lazy; touch the header so corrupt files fail here.
  char* err = nullptr;
  if (sqlite3_exec(raw, "SELECT count(*) FROM sqlite_master", nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "unreadable";
    sqlite3_free(err);
    throw IoError("cannot read " + path.string() + ": " + msg);
  }
}

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string_view to_string(ExecStatus s) noexcept {
  switch (s) {
    case ExecStatus::ok: return "ok";
    case ExecStatus::sql_error: return "sql_error";
    case ExecStatus::timeout: return "timeout";
  }
  return "sql_error";
}

// ---------------------------------------------------------------------------
// Rendering

std::string python_float_repr(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return std::signbit(value) ? "-0.0" : "0.0";

  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  std::string sci(buf, end);
  bool negative = false;
  if (sci.front() == '-') {
    negative = true;
    sci.erase(0, 1);
  }
  const auto epos = sci.find('e');
  const int exp10 = std::stoi(sci.substr(epos + 1));
  std::string digits = sci.substr(0, epos);
  digits.erase(std::remove(digits.begin(), digits.end(), '.'), digits.end());

  std::string out;
  if (exp10 >= -4 && exp10 < 16) {
    if (exp10 >= 0) {
      const auto int_len = static_cast<std::size_t>(exp10) + 1;
      if (digits.size() <= int_len) {
        out = digits + std::string(int_len - digits.size(), '0') + ".0";
      } else {
        out = digits.substr(0, int_len) + "." + digits.substr(int_len);
      }
    } else {
      out = "0." + std::string(static_cast<std::size_t>(-exp10 - 1), '0') + digits;
    }
  } else {
    out = digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    char exp_buf[16];
    std::snprintf(exp_buf, sizeof exp_buf, "e%c%02d", exp10 < 0 ? '-' : '+', std::abs(exp10));
    out += exp_buf;
  }
  return negative ? "-" + out : out;
}

namespace {

std::string python_str_repr(std::string_view s) {
  const bool has_single = s.find('\'') != std::string_view::npos;
  const bool has_double = s.find('"') != std::string_view::npos;
  const char quote = (has_single && !has_double) ? '"' : '\'';
  std::string out(1, quote);
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c == quote) out.push_back('\\');
        out.push_back(c);
    }
  }
  out.push_back(quote);
  return out;
}

std::string render_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "None"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return python_float_repr(v); }
    std::string operator()(const std::string& v) const { return python_str_repr(v); }
    std::string operator()(const Blob& v) const {
      return "<blob " + std::to_string(v.bytes.size()) + " bytes>";
    }
    std::string operator()(const BlobDigest& v) const { return "<blob sha256:" + v.sha256 + ">"; }
  };
  return std::visit(Visitor{}, cell);
}

}  // namespace

std::string render_rows(const Rows& rows, std::size_t max_rows) {
  std::string out = "[";
  const std::size_t shown = std::min(rows.size(), max_rows);
  for (std::size_t r = 0; r < shown; ++r) {
    if (r) out += ", ";
    out += "[";
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out += ", ";
      out += render_cell(rows[r][c]);
    }
    out += "]";
  }
  out += "]";
  if (shown < rows.size()) {
    out += "\n(showing first " + std::to_string(shown) + " of " + std::to_string(rows.size()) +
           " rows)";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

Cell canonical_cell(const Cell& cell, double scale, bool& coerced) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) {
      coerced = true;
      return std::monostate{};
    }
    double r = std::round(*d * scale) / scale;
    if (!std::isfinite(r)) r = *d;  // scale overflow: value is beyond rounding range
    if (r == 0.0) r = 0.0;           // drop the sign of -0.0
    // Integral reals compare equal to integers, as Python's 1 == 1.0 does.
    if (std::trunc(r) == r && std::fabs(r) < 9007199254740992.0) {
      return static_cast<std::int64_t>(r);
    }
    return r;
  }
  if (const auto* b = std::get_if<Blob>(&cell)) return BlobDigest{sha256_hex(b->bytes)};
  return cell;
}

void serialize_cell(const Cell& cell, std::string& out) {
  char buf[40];
  switch (cell.index()) {
    case 0: out += "N;"; break;
    case 1: out += "I" + std::to_string(std::get<std::int64_t>(cell)) + ";"; break;
    case 2:
      std::snprintf(buf, sizeof buf, "R%.17g;", std::get<double>(cell));
      out += buf;
      break;
    case 3: {
      const auto& s = std::get<std::string>(cell);
      out += "T" + std::to_string(s.size()) + ":" + s + ";";
      break;
    }
    case 5: out += "B" + std::get<BlobDigest>(cell).sha256 + ";"; break;
    default: break;  // raw blobs never reach serialization
  }
}

}  // namespace

bool NormalizedResult::equivalent_to(const NormalizedResult& other) const {
  return fingerprint == other.fingerprint && rows == other.rows;
}

NormalizedResult normalize_result(const Rows& raw, std::size_t column_count,
                                  const NormalizationConfig& config) {
  NormalizedResult out;
  out.column_count = column_count;
  const double scale = std::pow(10.0, config.float_precision);
  out.rows.reserve(raw.size());
  for (const Row& row : raw) {
    if (row.size() != column_count) {
      throw std::invalid_argument("ragged result: expected " + std::to_string(column_count) +
                                  " cells, got " + std::to_string(row.size()));
    }
    Row canon;
    canon.reserve(row.size());
    for (const Cell& c : row) canon.push_back(canonical_cell(c, scale, out.non_finite_coerced));
    out.rows.push_back(std::move(canon));
  }

  if (config.row_order == RowOrder::insensitive) {
    std::sort(out.rows.begin(), out.rows.end());
    if (config.bag == BagSemantics::set) {
      out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
    }
  } else if (config.bag == BagSemantics::set) {
    // Keep first occurrences, preserving order.
    Rows kept;
    Rows seen;
    for (auto& row : out.rows) {
      auto pos = std::lower_bound(seen.begin(), seen.end(), row);
      if (pos != seen.end() && *pos == row) continue;
      seen.insert(pos, row);
      kept.push_back(std::move(row));
    }
    out.rows = std::move(kept);
  }
  out.row_count = out.rows.size();

  std::string canonical;
  canonical += config.row_order == RowOrder::insensitive ? "u|" : "o|";
  for (const Row& row : out.rows) {
    for (const Cell& c : row) serialize_cell(c, canonical);
    canonical += '\n';
  }
  out.fingerprint = sha256_hex(canonical);
  return out;
}

bool results_equivalent(const ExecutionOutcome& a, const ExecutionOutcome& b) {
  return a.ok() && b.ok() && a.result && b.result && a.result->equivalent_to(*b.result);
}

ExecutionOutcome make_ok_outcome(const Rows& raw, std::size_t column_count,
                                 const NormalizationConfig& config) {
  ExecutionOutcome out;
  out.status = ExecStatus::ok;
  out.result = normalize_result(raw, column_count, config);
  out.raw_row_count = raw.size();
  out.rendered = render_rows(raw, config.preview_rows);
  return out;
}

ExecutionOutcome make_error_outcome(std::string message, ExecStatus status) {
  ExecutionOutcome out;
  out.status = status;
  out.rendered = "Error: " + message;
  out.error_message = std::move(message);
  return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct Deadline {
  Clock::time_point at;
  bool fired = false;
};

int progress_callback(void* arg) {
  auto* d = static_cast<Deadline*>(arg);
  if (Clock::now() >= d->at) {
    d->fired = true;
    return 1;
  }
  return 0;
}

// Clears the progress handler when execution leaves scope.
struct ProgressGuard {
  sqlite3* db;
  ~ProgressGuard() { sqlite3_progress_handler(db, 0, nullptr, nullptr); }
};

Cell read_cell(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT: return sqlite3_column_double(stmt, col);
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
      return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, col));
      const auto n = static_cast<std::size_t>(sqlite3_column_bytes(stmt, col));
      return Blob{p ? std::string(p, n) : std::string()};
    }
    default: return std::monostate{};
  }
}

}  // namespace

ExecutionOutcome execute_sql(const Database& db, const std::string& sql,
                             const NormalizationConfig& config) {
  const auto start = Clock::now();
  auto finish = [&](ExecutionOutcome out) {
    out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return out;
  };
  sqlite3* h = db.handle();

  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(h, sql.c_str(), static_cast<int>(sql.size()), &raw, &tail) != SQLITE_OK) {
    return finish(make_error_outcome(sqlite3_errmsg(h)));
  }
  Statement stmt(raw);
  if (!stmt) return finish(make_error_outcome("empty statement"));

  if (tail && *tail) {
    sqlite3_stmt* next = nullptr;
    const int rc = sqlite3_prepare_v2(h, tail, -1, &next, nullptr);
    Statement guard(next);
    if (rc != SQLITE_OK || next) {
      return finish(make_error_outcome("multiple statements are not supported"));
    }
  }
  if (!sqlite3_stmt_readonly(stmt.get())) {
    return finish(make_error_outcome("write statements are not allowed"));
  }

  Deadline deadline{start + config.timeout};
  sqlite3_progress_handler(h, 1000, &progress_callback, &deadline);
  ProgressGuard guard{h};

  const int columns = sqlite3_column_count(stmt.get());
  Rows rows;
  for (;;) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_ROW) {
      Row row;
      row.reserve(static_cast<std::size_t>(columns));
      for (int c = 0; c < columns; ++c) row.push_back(read_cell(stmt.get(), c));
      rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) break;
    if (deadline.fired || rc == SQLITE_INTERRUPT) {
      return finish(make_error_outcome(
          "execution exceeded " + std::to_string(config.timeout.count()) + " ms",
          ExecStatus::timeout));
    }
    return finish(make_error_outcome(sqlite3_errmsg(h)));
  }
  return finish(make_ok_outcome(rows, static_cast<std::size_t>(columns), config));
}

}  // namespace sqlsel
