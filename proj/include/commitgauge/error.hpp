#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace commitgauge {

enum class ErrorKind {
  parse,       // malformed document
  validation,  // well-formed but violates a domain rule
  not_found,
  conflict,    // id collision
  sealed,      // mutation of a sealed session
  io,
  version,     // unsupported schema version
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse_error";
    case ErrorKind::validation: return "validation_error";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::sealed: return "sealed";
    case ErrorKind::io: return "io_error";
    case ErrorKind::version: return "version_error";
  }
  return "error";
}

/// Every failure raised by the library. `details` carries per-item
/// findings (missing behavior ids, validation messages).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::vector<std::string> details = {})
      : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

}  // namespace commitgauge
