#pragma once

#include <stdexcept>
#include <string>

namespace iondyne {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  /// Short machine-readable category, e.g. "domain" or "config".
  [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

/// An argument lies outside the domain where a model is defined.
class DomainError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "domain"; }
};

/// Measured inputs are mutually inconsistent (e.g. a negative decay rate).
class InconsistentSignError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "inconsistent_sign"; }
};

/// Malformed or mismatched data handed to a fit or a file reader.
class InputError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "input"; }
};

/// Configuration failed validation. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const char* kind() const noexcept override { return "config"; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A fit cannot identify its parameters from the supplied data.
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "identifiability"; }
};

/// A numerical routine failed (singular matrix, optimizer breakdown).
class NumericalError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace iondyne

namespace iondyne {

/// Several candidate answers fit the data about equally well.
class AmbiguityError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "ambiguous"; }
};

}  // namespace iondyne
