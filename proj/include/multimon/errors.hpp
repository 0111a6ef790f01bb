#pragma once

#include <stdexcept>
#include <string>

namespace multimon {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed files, out-of-range parameters.
struct ConfigError : Error {
  using Error::Error;
};

// Circuit topology does not support the requested operation.
struct TopologyError : Error {
  using Error::Error;
};

// The linearized circuit is unstable or unphysical.
struct PhysicsError : Error {
  using Error::Error;
};

}  // namespace multimon
