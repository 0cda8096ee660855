#pragma once

#include <stdexcept>
#include <string>

namespace spahr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A basis fails the ortho-symplectic invariants or cannot be repaired.
class StructureError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class HyperReductionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear solve failure, tagged with the time step and parameter column.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, long step, long param)
      : Error(what + " (step " + std::to_string(step) + ", parameter " +
              std::to_string(param) + ")"),
        step_(step),
        param_(param) {}

  long step() const { return step_; }
  long param() const { return param_; }

 private:
  long step_;
  long param_;
};

}  // namespace spahr
