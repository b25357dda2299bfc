#pragma once

#include <stdexcept>
#include <string>

namespace flexpos {

// Base for every error the toolkit raises. The CLI maps each derived kind to
// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition or invariant on caller-supplied data does not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Configuration file could not be parsed or a key/value is invalid. The
// message always names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Singular systems, ill conditioning, unstable integration or closed-loop
// divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace flexpos
