#pragma once

#include <stdexcept>
#include <string>

namespace trafficbp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an infeasible or out-of-range parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or inconsistent (bad file, conflicting evidence).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration requested beyond the variable cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A probability table entry was zero where a logarithm is required.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace trafficbp
