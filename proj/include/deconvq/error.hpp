#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deconvq {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  numerical,
  uninformative,
  empty_grid,
  no_valid_candidate,
  usage,
};

std::string_view error_code_name(ErrorCode code);

//! Exception type thrown by every module; the code is surfaced by the CLI.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message)
{
  throw Error(code, message);
}

} // namespace deconvq
