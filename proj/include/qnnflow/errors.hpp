#pragma once

#include <stdexcept>
#include <string>

namespace qnnflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (syntax, missing or unknown fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Folding that does not tile a layer (divisibility, integral WM).
class FoldingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The minimal design does not fit the device; `resource()` names the budget.
class DeviceUnsuitable : public Error {
 public:
  DeviceUnsuitable(std::string resource, const std::string& what)
      : Error(what), resource_(std::move(resource)) {}
  const std::string& resource() const noexcept { return resource_; }

 private:
  std::string resource_;
};

}  // namespace qnnflow
