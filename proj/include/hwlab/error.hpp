#pragma once

#include <stdexcept>
#include <string>

namespace hwlab {

enum class ErrorCode {
  invalid_argument,
  unsupported_exponent,
  invalid_exponent,
  index_out_of_range,
  precondition,
  degenerate_input,
  non_finite,
  wrap_guard,
  numerical_failure,
  censored_fit,
  reduction_failure,
  io,
  incompatible_version,
};

/// Single exception type for the library; the code drives CLI exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace hwlab
