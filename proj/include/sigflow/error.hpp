#pragma once

#include <stdexcept>
#include <string>

namespace sigflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates an invariant of a domain type.
class InvariantError : public Error {
 public:
  InvariantError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The requested time step exceeds the stability bound of an explicit update.
class CflError : public Error {
 public:
  using Error::Error;
};

/// Characteristics crossed (or density lost positivity) in the mass-coordinate solver.
class BreakdownError : public Error {
 public:
  using Error::Error;
};

/// Singular or otherwise unsolvable linear system.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace sigflow
