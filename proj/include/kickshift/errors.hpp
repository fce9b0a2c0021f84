#pragma once

#include <stdexcept>
#include <string>

namespace kickshift {

/// Process exit codes used by the command-line driver.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  numerical_abort = 3,
  io_error = 4,
};

/// Invalid grid, model or run configuration (bad shape, bad units, unknown keys).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shape or grid mismatch between operands.
class ShapeError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// The numerics left their domain of validity (NaN, boundary leak, non-convergence).
class NumericalAbort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace kickshift
