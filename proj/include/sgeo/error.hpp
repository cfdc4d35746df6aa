#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgeo {

/// Input outside the mathematical domain of an operation (zero part under a
/// log-ratio, weights not summing to one, mismatched sizes, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or unreadable input file. Carries a 1-based line/column when the
/// location is known (0 otherwise).
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A covariance model that does not yield a positive definite matrix.
class InvalidModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver failure. `last_iterate` holds whatever the solver had
/// when it gave up.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, std::vector<double> last_iterate = {})
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}
  const std::vector<double>& last_iterate() const { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

}  // namespace sgeo
