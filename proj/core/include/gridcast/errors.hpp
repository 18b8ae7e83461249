#pragma once

#include <stdexcept>
#include <string>

namespace gridcast {

// Base class for every error this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor dimensions do not line up (programming or model-file error).
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(what) {}
};

// Bad run configuration, CLI usage, or checkpoint contents.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Unreadable, malformed or insufficient input data.
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(what) {}
};

// Non-finite values or failed numerical checks.
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace gridcast
