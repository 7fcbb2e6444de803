#pragma once

#include <stdexcept>
#include <string>

namespace fubif {

// Invalid or inconsistent run configuration (bad family name, eta <= 0, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Problems with input data: missing files, malformed CSV, missing labels.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Point/model dimensionality disagreement.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fubif
