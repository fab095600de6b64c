#pragma once

#include <stdexcept>
#include <string>

namespace vtrans {

/// Base of every error raised by the library. The CLI maps all of them to
/// exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed term, signature or process text.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent translation or signature setup (missing head image,
/// mismatched signatures, bad binder usage in an image).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad data in a language, relation or semantic translation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ValuationError : public Error {
 public:
  using Error::Error;
};

}  // namespace vtrans
