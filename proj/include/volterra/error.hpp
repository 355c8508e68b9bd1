#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace volterra {

/// Base of every error raised by the library. The CLI maps these to exit code 1
/// unless a subclass is a verification failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownFunction : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidSet : public Error {
 public:
  using Error::Error;
};

class InvalidDirection : public Error {
 public:
  using Error::Error;
};

class NegativeWeightFunction : public Error {
 public:
  using Error::Error;
};

class WeightSelectionFailed : public Error {
 public:
  using Error::Error;
};

class BoundaryConditionFailed : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class GridCoverage : public Error {
 public:
  using Error::Error;
};

class KernelEval : public Error {
 public:
  using Error::Error;
};

class InvalidMultimap : public Error {
 public:
  using Error::Error;
};

class NonContractive : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class IncompatibleTraces : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& section, const std::string& key, std::size_t line,
              const std::string& message)
      : Error(format(section, key, line, message)), section_(section), key_(key), line_(line) {}

  const std::string& section() const noexcept { return section_; }
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& section, const std::string& key, std::size_t line,
                            const std::string& message) {
    std::string where = "config";
    if (line > 0) where += " line " + std::to_string(line);
    if (!section.empty()) where += " [" + section + "]";
    if (!key.empty()) where += " " + key;
    return where + ": " + message;
  }

  std::string section_;
  std::string key_;
  std::size_t line_;
};

}  // namespace volterra
