#pragma once

#include <stdexcept>
#include <string>

namespace fbb {

/// Base for every validation failure raised by the library. The CLI maps
/// these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidArgument : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Two objects that must share a grid do not.
class GridMismatch : public ValidationError {
 public:
  GridMismatch() : ValidationError("grid mismatch: operands live on different grids") {}
  explicit GridMismatch(const std::string& what) : ValidationError(what) {}
};

/// Block length incompatible with the series length.
class InvalidBlock : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Fewer raw samples than basis functions.
class Underdetermined : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Statistic not defined for the supplied number of samples.
class Unsupported : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// File or stream failure. The CLI maps these to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fbb
