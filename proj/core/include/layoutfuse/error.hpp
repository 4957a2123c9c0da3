#pragma once

#include <stdexcept>
#include <string>

namespace layoutfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration document or argument failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dataset file could not be parsed or violates a record invariant.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace layoutfuse
