#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace genrestore {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Bad input: shapes, ranges, malformed files. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Factorization failures and broken numerical contracts. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Failure inside one stage of a multi-stage pipeline. CLI exit code 4.
class StageError : public std::runtime_error {
public:
  StageError(std::string stage, const std::string &what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  [[nodiscard]] const std::string &stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

inline void require_dim(Index expected, Index actual, const char *what) {
  if (expected != actual) {
    throw ValidationError(std::string(what) + ": dimension mismatch, expected d=" +
                          std::to_string(expected) + " but got d=" + std::to_string(actual));
  }
}

} // namespace genrestore
