#pragma once

#include <stdexcept>
#include <string>

namespace sparsescale {

/// Base for all library errors that callers are expected to handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A budget or target cannot be met; the message names the binding constraint.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The input does not determine the requested quantity (degenerate dataset).
class IllPosedError : public Error {
 public:
  using Error::Error;
};

/// A table or record is missing a required column or field.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text or an out-of-range configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsescale
