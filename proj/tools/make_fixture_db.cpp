// Builds a SQLite file from a SQL script: make_fixture_db <script.sql> <out.sqlite>
#include <sqlite3.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixture_db <script.sql> <out.sqlite>\n";
    return 2;
  }
  std::ifstream in(argv[1]);
  if (!in) {
    std::cerr << "cannot read " << argv[1] << "\n";
    return 1;
  }
  std::ostringstream script;
  script << in.rdbuf();

  const std::filesystem::path out(argv[2]);
  std::filesystem::create_directories(out.parent_path());
  std::filesystem::remove(out);
  sqlite3* db = nullptr;
  if (sqlite3_open(out.c_str(), &db) != SQLITE_OK) {
    std::cerr << "cannot create " << out << "\n";
    return 1;
  }
  char* err = nullptr;
  const std::string sql = "BEGIN;\n" + script.str() + "\nCOMMIT;";
  const int rc = sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err);
  if (rc != SQLITE_OK) std::cerr << out << ": " << (err ? err : "error") << "\n";
  sqlite3_free(err);
  sqlite3_close(db);
  return rc == SQLITE_OK ? 0 : 1;
}
