#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace parc {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateSecant : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace parc
