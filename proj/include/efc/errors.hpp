#pragma once

#include <stdexcept>
#include <string>

namespace efc {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Measure/test-function family not supported by the requested operation.
struct UnsupportedFamily : Error {
  using Error::Error;
};

// Adaptive integration could not meet the requested tolerance.
struct QuadratureFailure : Error {
  using Error::Error;
};

// A tabulated tail model fails the finiteness requirement.
struct TailNotConvergent : Error {
  using Error::Error;
};

// Evaluation grid exceeds the supported range for exact summation.
struct GridTooLarge : Error {
  using Error::Error;
};

// No rejection envelope is available for this coagulation family.
struct EnvelopeUnavailable : Error {
  using Error::Error;
};

// Total jump rate vanished; the state is absorbing.
struct ZeroRate : Error {
  using Error::Error;
};

// No rigorous tail bound is available for the requested function family.
struct TailBoundUnavailable : Error {
  using Error::Error;
};

struct ConfigError : Error {
  ConfigError(const std::string& key, const std::string& reason)
      : Error("config key '" + key + "': " + reason), key(key), reason(reason) {}
  std::string key;
  std::string reason;
};

}  // namespace efc
