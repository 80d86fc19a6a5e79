#pragma once

#include <stdexcept>
#include <string>

namespace qdroute {

enum class ErrorKind {
  Validation,
  Config,
  Range,
  Sequencing,
  MissingClip,
  Misorder,
  Numeric,
};

/// Base exception for every failure raised by the library. The kind drives
/// the CLI exit code: Numeric maps to 3, everything else to 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what)
      : Error(ErrorKind::Range, what) {}
};

class SequencingError : public Error {
 public:
  explicit SequencingError(const std::string& what)
      : Error(ErrorKind::Sequencing, what) {}
};

class MissingClipError : public Error {
 public:
  MissingClipError(int position, const std::string& what)
      : Error(ErrorKind::MissingClip, what), position_(position) {}
  int position() const noexcept { return position_; }

 private:
  int position_;
};

class MisorderError : public Error {
 public:
  MisorderError(int position, const std::string& what)
      : Error(ErrorKind::Misorder, what), position_(position) {}
  int position() const noexcept { return position_; }

 private:
  int position_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::Numeric, what) {}
};

inline int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::Numeric ? 3 : 2;
}

}  // namespace qdroute
