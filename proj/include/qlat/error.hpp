#pragma once

#include <stdexcept>
#include <string>

namespace qlat {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GraphError : public Error {
 public:
  GraphError(std::string subject, const std::string& message)
      : Error(message), subject_(std::move(subject)) {}

  /// Offending id, or "line N" for document-level failures.
  const std::string& subject() const noexcept { return subject_; }

 private:
  std::string subject_;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

class NotConcreteError : public Error {
 public:
  using Error::Error;
};

class ExecutionError : public Error {
 public:
  using Error::Error;
};

/// A lattice cell or instance outgrew the configured limits.
class CapError : public Error {
 public:
  CapError(std::string cell, long long count, const std::string& message)
      : Error(message), cell_(std::move(cell)), count_(count) {}

  const std::string& cell() const noexcept { return cell_; }
  long long count() const noexcept { return count_; }

 private:
  std::string cell_;
  long long count_;
};

}  // namespace qlat
