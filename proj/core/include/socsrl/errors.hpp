#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace socsrl {

/// Tensor or layout dimensions do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration (or a dataset against a configuration) is invalid.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse that is not a shape problem, e.g. pairing an agent with itself.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A loss or gradient became non-finite.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::int64_t round = -1)
      : std::runtime_error(what), round_(round) {}

  /// Training round at which the divergence happened, or -1 outside training.
  std::int64_t round() const noexcept { return round_; }

 private:
  std::int64_t round_;
};

/// A persisted artifact (IDX file, checkpoint, metrics file) is malformed.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint magic/version does not match what this build reads.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace socsrl
