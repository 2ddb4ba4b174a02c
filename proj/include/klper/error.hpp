#pragma once

#include <stdexcept>
#include <string>

namespace klper {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions disagree.
class ShapeError : public Error {
public:
  using Error::Error;
};

// A hyperparameter or configuration value is out of range.
class ConfigError : public Error {
public:
  using Error::Error;
};

// An object was used in the wrong lifecycle state (e.g. backward without forward).
class StateError : public Error {
public:
  using Error::Error;
};

// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// A matrix that must be positive definite is not, or a fit has too few samples.
class NumericalError : public Error {
public:
  using Error::Error;
};

class UnderfullError : public Error {
public:
  using Error::Error;
};

class EmptyPriorityError : public Error {
public:
  using Error::Error;
};

// A loss or parameter became NaN/Inf during an update.
class DivergenceError : public Error {
public:
  using Error::Error;
};

class UsageError : public Error {
public:
  using Error::Error;
};

class FileError : public Error {
public:
  FileError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

} // namespace klper
