#pragma once

#include <sqlite3.h>

#include <filesystem>
#include <memory>
#include <string>

namespace sqlsel {

// Owning handle to a read-only SQLite connection. One per worker; not shared
// across threads.
class Database {
 public:
  // Throws IoError naming the path if the file is missing or unreadable.
  explicit Database(const std::filesystem::path& path);

  sqlite3* handle() const noexcept { return db_.get(); }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  struct Closer {
    void operator()(sqlite3* db) const noexcept { sqlite3_close_v2(db); }
  };
  std::filesystem::path path_;
  std::unique_ptr<sqlite3, Closer> db_;
};

struct StatementFinalizer {
  void operator()(sqlite3_stmt* stmt) const noexcept { sqlite3_finalize(stmt); }
};
using Statement = std::unique_ptr<sqlite3_stmt, StatementFinalizer>;

// Double-quoted SQL identifier.
std::string quote_identifier(const std::string& name);

}  // namespace sqlsel
