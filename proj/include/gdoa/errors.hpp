#pragma once

#include <stdexcept>
#include <string>

namespace gdoa {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix sizes that do not agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Inconsistent scenario / run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Non-finite input data.
class InputError : public Error {
public:
  using Error::Error;
};

// A factorization or recursion produced an impossible value.
class NumericalError : public Error {
public:
  using Error::Error;
};

// Rank-deficient or ill-conditioned system.
class RankError : public Error {
public:
  using Error::Error;
};

// Malformed file contents.
class ParseError : public Error {
public:
  using Error::Error;
};

// Well-formed file whose contents are inconsistent.
class DataError : public Error {
public:
  using Error::Error;
};

} // namespace gdoa
