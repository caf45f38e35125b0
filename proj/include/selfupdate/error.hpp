#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace selfupdate {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  empty_input,
  not_found,
  parse_error,
  io_error,
  budget_exceeded,
  infeasible,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every module of the library. The code is stable
/// and is what the CLI prints in its machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace selfupdate
