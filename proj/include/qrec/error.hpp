#pragma once

#include <stdexcept>
#include <string>

namespace qrec {

/// Base for every error raised by the library. Carries the name of the
/// module that raised it so front ends can prefix diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// An operation was called on inputs that violate its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An input document could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qrec
