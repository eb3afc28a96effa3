#pragma once

#include <stdexcept>
#include <string>

namespace survgen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to a numerical routine (out-of-domain probability, negative scale, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A registry lookup failed.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Formula text could not be parsed. `position` is the 0-based byte offset.
class FormulaError : public Error {
 public:
  FormulaError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Scenario document is structurally or semantically invalid. `path` points into the document.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Failure while executing a valid scenario.
class RuntimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace survgen
