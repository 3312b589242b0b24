#pragma once

#include <stdexcept>
#include <string>

namespace stag {

/// Broad failure class; the CLI maps each to a distinct exit status.
enum class ErrorClass { config, numerical, invariant };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), cls_(cls), module_(std::move(module)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorClass cls_;
  std::string module_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string module, const std::string& what)
      : Error(ErrorClass::config, std::move(module), what) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string module, const std::string& what)
      : Error(ErrorClass::numerical, std::move(module), what) {}
};

class InvariantError : public Error {
 public:
  InvariantError(std::string module, const std::string& what)
      : Error(ErrorClass::invariant, std::move(module), what) {}
};

}  // namespace stag
