#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aoa {

/// Unreadable path, failed write, or any other filesystem-level problem.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record violates the wire schema. `line` is 1-based when known, 0 otherwise.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")" : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// schema_version went backwards within one result file.
class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FormatErrorKind {
  MissingSegment,       // a dialectic tag is absent or its content is empty
  SegmentOrder,         // tags present but not in thesis -> antithesis -> synthesis order
  UnknownAttribution,   // attribution trailer missing or its token is not a known label
  UnknownAction,        // action trailer missing or its verb is not Search/Revise/Confirm
  ActionArity,          // argument present/absent in violation of the verb's arity
};

std::string_view to_string(FormatErrorKind kind);

/// Structured-trace parse failure; names the first violated rule.
class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// A forced-choice reply contained neither an internal nor an external verdict.
class AmbiguityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Teacher-driven generation exhausted its retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aoa
