#pragma once

#include <stdexcept>
#include <string>

namespace fpphe {

enum class ErrorKind {
  invalid_parameter,
  infeasible,
  unstable,
  resource_limit,
  exhausted,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. The kind selects the C status
/// code and the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what)
      : Error(ErrorKind::invalid_parameter, what) {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what) : Error(ErrorKind::infeasible, what) {}
};

class Unstable : public Error {
 public:
  explicit Unstable(const std::string& what) : Error(ErrorKind::unstable, what) {}
};

class ResourceLimit : public Error {
 public:
  explicit ResourceLimit(const std::string& what)
      : Error(ErrorKind::resource_limit, what) {}
};

class Exhausted : public Error {
 public:
  explicit Exhausted(const std::string& what) : Error(ErrorKind::exhausted, what) {}
};

}  // namespace fpphe
