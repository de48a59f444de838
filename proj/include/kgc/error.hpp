#pragma once

#include <stdexcept>
#include <string>

namespace kgc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes incompatible with the op.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (TSV, embedding file, checkpoint, graph cache).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during training or encoding (NaN, Inf).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgc
