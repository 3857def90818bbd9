#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sqlsel/sqlite_db.hpp"

namespace sqlsel {

struct Blob {
  std::string bytes;
  auto operator<=>(const Blob&) const = default;
};

// Canonical stand-in for a blob: hex SHA-256 of its bytes.
struct BlobDigest {
  std::string sha256;
  auto operator<=>(const BlobDigest&) const = default;
};

// One result cell. Raw results may hold any alternative; canonical results
// never hold Blob (digested) and never hold a non-finite or integral real.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, Blob, BlobDigest>;
using Row = std::vector<Cell>;
using Rows = std::vector<Row>;

enum class RowOrder { insensitive, sensitive };
enum class BagSemantics { set, multiset };

struct NormalizationConfig {
  int float_precision = 6;
  RowOrder row_order = RowOrder::insensitive;
  BagSemantics bag = BagSemantics::set;
  std::chrono::milliseconds timeout{30000};
  // Rows shown when a result is rendered for a judge prompt.
  std::size_t preview_rows = 10;
};

// Canonical form of a result set plus its fingerprint.
struct NormalizedResult {
  std::size_t column_count = 0;
  Rows rows;
  std::size_t row_count = 0;
  std::string fingerprint;
  // Some NaN/Inf real was mapped to null.
  bool non_finite_coerced = false;

  // Canonical-form equality; the fingerprint only short-circuits.
  bool equivalent_to(const NormalizedResult& other) const;
};

enum class ExecStatus { ok, sql_error, timeout };

std::string_view to_string(ExecStatus s) noexcept;

struct ExecutionOutcome {
  ExecStatus status = ExecStatus::sql_error;
  std::optional<NormalizedResult> result;  // present iff ok
  std::optional<std::string> error_message;  // present iff not ok
  std::chrono::milliseconds elapsed{0};
  std::size_t raw_row_count = 0;
  // Python-style rendering of the first preview_rows raw rows, with a row
  // count note when truncated. This is what a judge sees.
  std::string rendered;

  bool ok() const noexcept { return status == ExecStatus::ok; }
};

using OutcomePtr = std::shared_ptr<const ExecutionOutcome>;

// Runs one statement against a read-only connection. Write statements and
// multi-statement texts come back as sql_error; the database is never mutated.
ExecutionOutcome execute_sql(const Database& db, const std::string& sql,
                             const NormalizationConfig& config = {});

// Throws std::invalid_argument on ragged rows.
NormalizedResult normalize_result(const Rows& raw, std::size_t column_count,
                                  const NormalizationConfig& config = {});

// True iff both outcomes are ok and their canonical forms are equal. A non-ok
// outcome is equivalent to nothing, itself included.
bool results_equivalent(const ExecutionOutcome& a, const ExecutionOutcome& b);

// Outcome for a result that did not come from SQLite (tests, simulation).
ExecutionOutcome make_ok_outcome(const Rows& raw, std::size_t column_count,
                                 const NormalizationConfig& config = {});
ExecutionOutcome make_error_outcome(std::string message, ExecStatus status = ExecStatus::sql_error);

// Python repr of a float: shortest round-trip digits, fixed notation for
// decimal exponents in [-4, 16), ".0" on integral values.
std::string python_float_repr(double value);

// "[[1, 'a'], [2, None]]" for the first `max_rows` rows; appends a note with
// the total when rows were dropped.
std::string render_rows(const Rows& rows, std::size_t max_rows);

}  // namespace sqlsel
