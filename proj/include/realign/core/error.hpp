#pragma once

#include <stdexcept>
#include <string>

namespace realign {

// Base class for all library errors. The CLI maps the three subclasses
// below onto its exit codes (2 = config, 3 = data, 4 = numeric).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace realign
