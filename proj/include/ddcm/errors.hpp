#pragma once

#include <stdexcept>
#include <string>

namespace ddcm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes disagree (strain/stress lengths, metric size, element counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value failed (negative count, empty set, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Linear system could not be factorized after constraint elimination.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, int zero_energy_modes)
      : Error(what), zero_energy_modes_(zero_energy_modes) {}
  int zero_energy_modes() const noexcept { return zero_energy_modes_; }

 private:
  int zero_energy_modes_;
};

/// Input file could not be parsed or is internally inconsistent.
class MalformedFileError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Ball vote requested between coincident points.
class DegenerateVoteError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddcm
