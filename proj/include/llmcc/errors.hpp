#pragma once

#include <stdexcept>
#include <string>

namespace llmcc {

// Exit codes used by the CLI. Every library error maps onto one of these.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kDegenerateData = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Bad input: config values, schedules, domain violations, contract violations.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ExitCode::kValidation, what) {}
};

// Malformed file content. Carries the 1-based line number where parsing stopped.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::kIo, what) {}
};

// Too little or too uniform data to derive a quantity (e.g. thresholds).
class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& what) : Error(ExitCode::kDegenerateData, what) {}
};

class InsufficientDataError : public DegenerateDataError {
 public:
  using DegenerateDataError::DegenerateDataError;
};

class DegenerateDistributionError : public DegenerateDataError {
 public:
  using DegenerateDataError::DegenerateDataError;
};

}  // namespace llmcc
