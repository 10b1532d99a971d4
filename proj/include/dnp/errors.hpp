#pragma once

#include <stdexcept>
#include <string>

namespace dnp {

// Each kind maps to one CLI exit code (see exit_code()).
enum class ErrorKind {
  usage,
  config_syntax,
  config_unknown_key,
  config_value,
  degeneracy,
  fit_failure,
  domain,
  calibration,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, const std::string& what) : Error(kind, what) {}
};

class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what) : Error(ErrorKind::degeneracy, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double asymptotic_bound)
      : Error(ErrorKind::calibration, what), bound_(asymptotic_bound) {}
  double asymptotic_bound() const noexcept { return bound_; }

 private:
  double bound_;
};

int exit_code(ErrorKind kind) noexcept;

}  // namespace dnp
