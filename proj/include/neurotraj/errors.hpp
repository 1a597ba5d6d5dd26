#pragma once

#include <stdexcept>
#include <string>

namespace neurotraj {

/// Invalid user-facing configuration (bad flags, bad config fields).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (shape mismatch, empty input).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateTimestepError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedCorrelationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateBandwidthError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when persisted records cannot be parsed back.
class MalformedDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace neurotraj
