#pragma once

#include <stdexcept>
#include <string>

namespace embedkit {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, out-of-range parameters, violated
// preconditions. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem or network failure. Also exit code 2 at the CLI.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace embedkit
