#pragma once

#include <stdexcept>
#include <string>

namespace rg {

enum class ErrorCode {
  invalid_argument = 1,
  precondition = 2,
  not_converged = 3,
  unknown_name = 4,
  io = 5,
  internal = 6,
};

/// Exception type thrown throughout the core. The C API maps `code()` onto
/// its status enumeration.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace rg
