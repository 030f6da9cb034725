#pragma once

#include <stdexcept>
#include <string>

namespace kinkbeam {

/// Invalid user input: bad config values, malformed files, violated preconditions.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}

  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  /// Name of the offending field, empty when the error is not tied to one.
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Numerical breakdown during a computation (NaN, singular solve, failed eigen-solve).
/// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kinkbeam
