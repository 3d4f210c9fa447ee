#pragma once

#include <stdexcept>
#include <string>

namespace rppg {

enum class ErrorKind {
  InvalidArgument,  // violated precondition on a value or configuration
  Parse,            // malformed file content
  Io,               // missing / unreadable / unwritable path
  Numerical,        // degenerate numerics (no spectral peak, zero denominator, ...)
};

/// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace rppg
