#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dwh {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: parameters out of range, malformed configs, mismatched grids.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ResourceLimit : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class AlignmentError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

// Collects every violated constraint so a config can be fixed in one pass.
class ValidationError : public InvalidParameter {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : InvalidParameter(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& p : items) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

// The numerics failed on otherwise valid input (exit code 2 in the CLI).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IntegrationDiverged : public NumericalError {
 public:
  IntegrationDiverged(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dwh
