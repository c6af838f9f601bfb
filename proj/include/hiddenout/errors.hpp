#pragma once

#include <stdexcept>
#include <string>

namespace hiddenout {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class InvalidSubspaceError : public Error {
 public:
  using Error::Error;
};

class DegenerateDimensionError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class NoOriginError : public Error {
 public:
  using Error::Error;
};

/// Raised when a generator exhausts its restart budget for a point.
class GenerationFailure : public Error {
 public:
  GenerationFailure(const std::string& what, int restarts, int empty_intervals,
                    int ray_failures, int iteration_cap_hits)
      : Error(what),
        restarts_(restarts),
        empty_intervals_(empty_intervals),
        ray_failures_(ray_failures),
        iteration_cap_hits_(iteration_cap_hits) {}

  int restarts() const noexcept { return restarts_; }
  int empty_intervals() const noexcept { return empty_intervals_; }
  int ray_failures() const noexcept { return ray_failures_; }
  int iteration_cap_hits() const noexcept { return iteration_cap_hits_; }

 private:
  int restarts_;
  int empty_intervals_;
  int ray_failures_;
  int iteration_cap_hits_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace hiddenout
