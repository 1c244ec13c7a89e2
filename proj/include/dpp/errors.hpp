#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression syntax error. Carries the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Expression evaluation failure (division by zero, unbound variable, ...).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Malformed mesh document.
class MeshFormatError : public Error {
 public:
  using Error::Error;
};

/// Configuration schema violation. Carries the key path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// The constrained linear system is structurally or numerically singular.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpp
