#pragma once

#include <stdexcept>
#include <string>

namespace motsmine {

// Input that violates a type invariant or an operation precondition.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failure: missing file, short read, failed write or rename.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace motsmine
