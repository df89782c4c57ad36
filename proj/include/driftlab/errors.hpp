#pragma once

#include <stdexcept>
#include <string>

namespace driftlab {

// Invalid configuration or invalid arguments to an operation. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during simulation or fitting. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an operation is asked to work on an empty selection of paths,
// e.g. a class-conditional statistic with no paths of that class.
class EmptySelection : public std::runtime_error {
 public:
  explicit EmptySelection(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace driftlab
