#pragma once

#include <stdexcept>
#include <string>

namespace pmvb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator/vector shape mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A dense (desk-scale) routine was asked to exceed its size guard.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver produced non-finite values or otherwise diverged.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_ = -1;
};

}  // namespace pmvb
