#pragma once

#include <stdexcept>
#include <string>

namespace ingarch {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind { Config = 2, Data = 3, Numerical = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Raised when the intensity recursion leaves the representable range.
class IntensityOverflow : public NumericalError {
 public:
  IntensityOverflow(std::size_t t, const std::string& detail)
      : NumericalError("intensity overflow at t=" + std::to_string(t) + ": " + detail), index_(t) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace ingarch
