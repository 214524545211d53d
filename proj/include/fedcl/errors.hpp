#pragma once

#include <stdexcept>
#include <string>

namespace fedcl {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Parameter layout mismatch between a ParamVector and what the caller expected.
class LayoutError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, long row)
      : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

class ImputationError : public Error {
 public:
  explicit ImputationError(const std::string& column)
      : Error("column '" + column + "' is entirely missing and cannot be imputed"),
        column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class ScaleError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Raised by the loss kernels when a loss or gradient entry is NaN/Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss; carries where it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int task, int round, int client)
      : Error(what + " [task " + std::to_string(task) + ", round " + std::to_string(round) +
              ", client " + std::to_string(client) + "]"),
        task_(task),
        round_(round),
        client_(client) {}
  int task() const noexcept { return task_; }
  int round() const noexcept { return round_; }
  int client() const noexcept { return client_; }

 private:
  int task_;
  int round_;
  int client_;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedcl
