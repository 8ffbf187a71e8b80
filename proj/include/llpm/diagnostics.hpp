#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace llpm {

// Base for all hard failures (bad schema, bad arguments, I/O). Checks that
// produce findings (validate, check_deadlock, equivalence_check) return
// result values instead of throwing.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Filesystem failure (unreadable input, unwritable output). Separate from
// Error so drivers can distinguish I/O trouble from semantic rejection.
class IoError : public Error {
public:
  using Error::Error;
};

// Malformed textual input; offset is a byte index into the source text.
class ParseError : public Error {
public:
  ParseError(size_t offset, const std::string& msg)
      : Error("syntax error at byte " + std::to_string(offset) + ": " + msg),
        offset_(offset) {}
  size_t offset() const { return offset_; }

private:
  size_t offset_;
};

struct Diagnostic {
  std::string message;
  std::optional<uint32_t> node; // offending graph node, when known

  std::string to_string() const {
    if (node) return "node " + std::to_string(*node) + ": " + message;
    return message;
  }
};

inline std::string join_diagnostics(const std::vector<Diagnostic>& ds) {
  std::string out;
  for (const auto& d : ds) {
    if (!out.empty()) out += "\n";
    out += d.to_string();
  }
  return out;
}

} // namespace llpm
