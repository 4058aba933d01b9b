#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gptutor {

enum class ErrorCode {
  RootNotFound,
  FileNotFound,
  OutsideWorkspace,
  NoToken,
  InvalidArgument,
  BudgetTooSmall,
  AuthError,
  RateLimited,
  BackendUnavailable,
  MalformedResponse,
  RequestRejected,
  StoreUnwritable,
  Cancelled,
};

std::string_view to_string(ErrorCode code) noexcept;

// All domain failures surface as this exception; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gptutor
