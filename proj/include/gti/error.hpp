#pragma once

#include <stdexcept>
#include <string>

namespace gti {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV cell, JSON value, fraction literal).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Bad user configuration, e.g. a truth column that does not exist.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// An operation was called outside its domain.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// The sample carries too little information for the requested estimate.
class DegenerateError : public Error {
public:
  using Error::Error;
};

/// Supplied or recovered statistics cannot describe any finite sample.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

} // namespace gti
