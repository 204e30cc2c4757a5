#pragma once

#include <stdexcept>
#include <string>

namespace emi {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid curve or scene construction input.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A collocation node is not shared by exactly two domains.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Kernel or quadrature evaluated where it is undefined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Dense factorization failed or is numerically singular.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values entering or leaving a membrane or step evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace emi
