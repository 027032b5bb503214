#pragma once

#include <stdexcept>
#include <string>

namespace gst {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpaceMismatch : Error {
  using Error::Error;
};

struct ArityError : Error {
  using Error::Error;
};

struct UnboundSymbol : Error {
  using Error::Error;
};

struct InvalidBC : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  using Error::Error;
};

struct NonConvergence : Error {
  NonConvergence(const std::string& what, int iterations, double residual)
      : Error(what), iterations(iterations), residual(residual) {}
  int iterations = 0;
  double residual = 0.0;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct TapeSealed : Error {
  using Error::Error;
};

struct TapeNotSealed : Error {
  using Error::Error;
};

struct InvalidInnerProduct : Error {
  using Error::Error;
};

struct EigensolverError : Error {
  EigensolverError(const std::string& what, int restarts = 0, double residual = 0.0)
      : Error(what), restarts(restarts), residual(residual) {}
  int restarts = 0;
  double residual = 0.0;
};

struct BreakdownError : EigensolverError {
  using EigensolverError::EigensolverError;
};

struct UnknownModel : Error {
  using Error::Error;
};

struct OracleMismatch : Error {
  using Error::Error;
};

struct UnsupportedFunctional : Error {
  using Error::Error;
};

struct ConfigError : Error {
  ConfigError(const std::string& what, std::string key = {})
      : Error(what), key(std::move(key)) {}
  std::string key;
};

}  // namespace gst
