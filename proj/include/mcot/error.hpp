#pragma once

#include <stdexcept>
#include <string>

namespace mcot {

/// Failure categories surfaced to callers and mapped to CLI exit codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Config = 2,
  InitNotConverged = 3,
  Stall = 4,
  SingularGram = 5,
  NonFinite = 6,
  Numerical = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

class NotConverged : public Error {
 public:
  explicit NotConverged(const std::string& what) : Error(ErrorCode::InitNotConverged, what) {}
};

class StallError : public Error {
 public:
  explicit StallError(const std::string& what) : Error(ErrorCode::Stall, what) {}
};

class SingularGramError : public Error {
 public:
  explicit SingularGramError(const std::string& what) : Error(ErrorCode::SingularGram, what) {}
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& what) : Error(ErrorCode::NonFinite, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCode::Numerical, what) {}
};

}  // namespace mcot
