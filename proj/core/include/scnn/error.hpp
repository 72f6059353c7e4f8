#pragma once

#include <stdexcept>
#include <string>

namespace scnn {

// Base of every error the library throws. The CLI maps each subclass onto
// a stable exit code (see tools/cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or parameter shapes do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters, impossible mask specs, unknown config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or consumed.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Missing file, unwritable directory, short write.
class IoError : public Error {
 public:
  using Error::Error;
};

// File exists but its bytes are not what the reader expects.
class CorruptFileError : public Error {
 public:
  using Error::Error;
};

// Well-formed checkpoint written by an incompatible format version.
class VersionError : public CorruptFileError {
 public:
  using CorruptFileError::CorruptFileError;
};

// Image file in a format the loader does not handle.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace scnn
