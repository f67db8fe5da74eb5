#pragma once

#include <stdexcept>
#include <string>

namespace hkl {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A request would materialize more vertices than the configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to satisfy its contract.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace hkl
