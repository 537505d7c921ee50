#pragma once

#include <stdexcept>
#include <string>

namespace smoothot {

// Malformed or contract-violating arguments (dimension mismatch, t <= 0, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when two measures agree on every moment up to the configured cap.
class IndistinguishableMeasures : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double last_violation)
      : NumericError(what), last_violation_(last_violation) {}
  double last_violation() const { return last_violation_; }

 private:
  double last_violation_;
};

class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schema violation in an input file; pointer() is an RFC 6901 JSON pointer.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace smoothot
