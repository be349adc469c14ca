#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tvbg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside the mathematical domain of an operation (negative counts, gamma <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Series too short or misaligned.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// One failed constraint of a ThetaSet or ScenarioSpec.
struct Violation {
  std::string code;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Malformed input file. `row`/`column` are 1-based, 0 when not applicable.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t row = 0, std::size_t column = 0);
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Data lookups that cannot be satisfied: unknown country, window outside the table, ...
class DataError : public Error {
 public:
  using Error::Error;
};

/// A named entity (country, stored model) that does not exist.
class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

class FitError : public Error {
 public:
  enum class Kind { window_too_short, infeasible, budget_exhausted };
  FitError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace tvbg
