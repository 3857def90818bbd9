#pragma once

#include <stdexcept>
#include <string>

namespace sqlsel {

// Base of every error the engine throws. `kind()` is a short stable token
// that the CLI writes into its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed input file or record.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse_error", message) {}
};

// Filesystem or database I/O failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

// Inconsistent or incomplete configuration (e.g. oracle judge without gold).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

// Judge transport failed after all retries. Distinct from a parse failure.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error("transport_error", message) {}
};

// No candidate in the pool executed successfully.
class NoExecutableCandidate : public Error {
 public:
  explicit NoExecutableCandidate(const std::string& message)
      : Error("no_executable_candidate", message) {}
};

}  // namespace sqlsel
