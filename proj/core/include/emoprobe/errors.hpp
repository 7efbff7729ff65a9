#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emoprobe {

// Base of every error raised by the library. Callers that only need a
// message can catch this; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. `line` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Invalid configuration value; `field` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Binary or document format violation (bad magic, truncation, version).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Inputs disagree with each other (ids, categories, dimensions).
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Base for failures of the numerical core.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class ProjectionSide { kLabel, kEvent };

// ||W x|| == 0 for a label (W1) or event (W2) row.
class DegenerateProjectionError : public NumericalError {
 public:
  DegenerateProjectionError(ProjectionSide side, std::size_t row)
      : NumericalError(std::string("degenerate projection: zero norm for ") +
                       (side == ProjectionSide::kLabel ? "label" : "event") +
                       " row " + std::to_string(row)),
        side_(side),
        row_(row) {}
  ProjectionSide side() const noexcept { return side_; }
  std::size_t row() const noexcept { return row_; }

 private:
  ProjectionSide side_;
  std::size_t row_;
};

class DivergenceError : public NumericalError {
 public:
  explicit DivergenceError(std::size_t epoch)
      : NumericalError("training diverged (non-finite loss) at epoch " +
                       std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace emoprobe
