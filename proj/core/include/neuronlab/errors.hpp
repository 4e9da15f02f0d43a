#pragma once

#include <stdexcept>
#include <string>

namespace neuronlab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: unknown keys, malformed values, out-of-range parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A theorem or operation was invoked outside the region where it applies.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The requested computation has no implementation for this combination
// (e.g. a closed form for a non-Gaussian input distribution).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace neuronlab
