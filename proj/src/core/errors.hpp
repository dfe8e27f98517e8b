#pragma once

#include <stdexcept>
#include <string>

namespace harvestsim {

/// Base of every error raised by the core. The C API maps subclasses onto
/// status codes, the CLI maps those onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a numeric argument was violated (log of zero, negative
/// distance, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `path()` is the dotted key path when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  explicit ConfigError(const std::string& what) : Error(what) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// An iterative solver failed. `last_iterate()` carries the value it stopped at.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double last_iterate)
      : Error(what), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

}  // namespace harvestsim
