#pragma once

#include <stdexcept>
#include <string>

namespace glwire {

/// Base class for every error raised by the library. The CLI maps
/// subclasses onto exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class MeshAspectError : public GeometryError {
public:
  using GeometryError::GeometryError;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class CompatibilityError : public Error {
public:
  using Error::Error;
};

class LinearSolveError : public Error {
public:
  using Error::Error;
};

class EigSolveError : public Error {
public:
  using Error::Error;
};

class BlowupError : public Error {
public:
  BlowupError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

class EmptyRegion : public Error {
public:
  using Error::Error;
};

class DegenerateFit : public Error {
public:
  using Error::Error;
};

class ZeroOrderParameter : public Error {
public:
  using Error::Error;
};

class InsufficientHorizon : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace glwire
