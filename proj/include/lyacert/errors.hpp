#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace lyacert {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a matrix that must be symmetric is not, beyond tolerance.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotStableError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

class InvalidOrderUnitError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class NotMetzlerError : public Error {
 public:
  using Error::Error;
};

/// The exact eigen-structure path was unavailable and the heuristic fallback was disabled.
class NeedsFallbackError : public Error {
 public:
  using Error::Error;
};

/// The Lyapunov operator is singular: some eigenvalue pair sums to zero.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, std::complex<double> first,
                      std::complex<double> second)
      : Error(what), first_(first), second_(second) {}

  std::complex<double> first() const { return first_; }
  std::complex<double> second() const { return second_; }

 private:
  std::complex<double> first_;
  std::complex<double> second_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class NoInjectionError : public Error {
 public:
  using Error::Error;
};

/// The Hamiltonian has eigenvalues on the imaginary axis.
class MarginalError : public Error {
 public:
  using Error::Error;
};

class NotObserverError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Two routes that must agree did not. Always a bug, never a verdict.
class InternalInconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace lyacert
