#pragma once

#include <stdexcept>
#include <string>

namespace anderson {

// Process exit codes shared by the library error hierarchy and the CLI.
enum class ExitCode : int {
  ok = 0,
  config = 1,
  divergence = 2,
  capacity = 3,
  validation_failed = 4,
  numerical = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::numerical; }
};

/// Invalid input: malformed configuration or violated type invariant.
/// `field` names the offending config path when known ("window.delta_prime").
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, std::string field = {})
      : Error(field.empty() ? msg : field + ": " + msg), message_(msg), field_(std::move(field)) {}
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
  const std::string& field() const noexcept { return field_; }
  // The diagnostic without the field prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::string field_;
};

/// Point too close to an integration contour, windows overlapping, etc.
class GeometryError : public ConfigError {
 public:
  explicit GeometryError(const std::string& msg) : ConfigError(msg) {}
};

/// Closed form evaluated outside the region where its branch is valid.
class DomainError : public ConfigError {
 public:
  explicit DomainError(const std::string& msg) : ConfigError(msg) {}
};

/// Walk expansion ratio at or above one.
class DivergenceError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::divergence; }
};

/// Requested enumeration depth or dimension beyond the configured hard limits.
class CapacityError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::capacity; }
};

/// Quadrature non-convergence, solver breakdown, sampling failure.
class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::numerical; }
};

}  // namespace anderson
