// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_ERRORS_HPP
#define HANDBALL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace handball {

/// Base class for failures of the beamformer design chain.
class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Channel matrix is (numerically) zero; no dominant singular vector exists.
class DegenerateChannelError : public DesignError {
 public:
  using DesignError::DesignError;
};

/// A one-bit rail carries no signal, so the Bussgang gain is not invertible.
class SingularScalingError : public DesignError {
 public:
  using DesignError::DesignError;
};

/// Quantization distortion alone exceeds the transmit power budget.
class InfeasiblePowerError : public DesignError {
 public:
  using DesignError::DesignError;
};

/// Malformed experiment configuration text.
class SpecParseError : public std::runtime_error {
 public:
  SpecParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Failure to write or rename an output artifact.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally valid configuration with an out-of-range or inconsistent field.
class SpecValidationError : public std::runtime_error {
 public:
  SpecValidationError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace handball

#endif  // HANDBALL_ERRORS_HPP
