#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace noisemix {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver produced an overflow or NaN; usually the step is too large.
class NonFinite : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveSemidefinite : public Error {
 public:
  using Error::Error;
};

/// Semantic violation of a documented invariant. `key()` names the offending
/// configuration key or argument.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace noisemix
