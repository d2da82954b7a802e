#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latdesign {

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a requested computation exceeds a configured size cap.
class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(const std::string& what, std::uint64_t requested)
      : std::runtime_error(what), requested_(requested) {}

  std::uint64_t requested() const noexcept { return requested_; }

 private:
  std::uint64_t requested_;
};

/// Raised when a well-formed request has no valid answer (e.g. no designable target).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latdesign
