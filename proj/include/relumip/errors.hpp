#ifndef RELUMIP_ERRORS_HPP_
#define RELUMIP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace relumip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (network, bounds, dataset, MPS, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Layer sizes or vector lengths that do not chain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An interval with lo > hi.
class IntervalError : public Error {
 public:
  using Error::Error;
};

/// Invalid use of the model builder (unknown id, inverted bounds, bad name).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// An encoder could not produce a valid formulation.
class EncodingError : public Error {
 public:
  using Error::Error;
};

}  // namespace relumip

#endif  // RELUMIP_ERRORS_HPP_
