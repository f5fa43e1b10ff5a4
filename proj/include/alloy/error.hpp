#pragma once

#include <stdexcept>
#include <string>

namespace alloy {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A geometric precondition failed (empty set, site not a member, L too small).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A model input is inconsistent (missing coupling, bad density parameters).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis required by the requested check does not hold.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// (H - z) is numerically singular. Callers interpret this as "z in spectrum".
class SingularError : public Error {
 public:
  SingularError(const std::string& what, double rcond) : Error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Configuration file is malformed or incomplete.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alloy
