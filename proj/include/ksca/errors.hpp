#pragma once

#include <stdexcept>
#include <string>

namespace ksca {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (bad dimensions, out-of-range parameters).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Non-finite entries or otherwise malformed numeric input.
class InvalidInput : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class DependentColumns : public Error {
public:
  using Error::Error;
};

class NotSymmetric : public Error {
public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ZeroVector : public Error {
public:
  using Error::Error;
};

class GenerationFailure : public Error {
public:
  using Error::Error;
};

class IncompleteOcs : public Error {
public:
  using Error::Error;
};

class CombinatorialBudgetExceeded : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace ksca
