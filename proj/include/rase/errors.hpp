#pragma once

#include <stdexcept>
#include <string>

namespace rase {

// Bad configuration or usage. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or incompatible on-disk data. CLI exit code 3.
class DataFormatError : public std::runtime_error {
 public:
  explicit DataFormatError(const std::string& what) : std::runtime_error(what) {}
};

// Shot collections that cannot be matched up shot-by-shot.
class PairingError : public DataFormatError {
 public:
  explicit PairingError(const std::string& what) : DataFormatError(what) {}
};

// Numerical failure: degenerate fits, undefined ratios, inconsistent states.
// CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rase
