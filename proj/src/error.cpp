#include "gptutor/error.hpp"

namespace gptutor {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RootNotFound: return "RootNotFound";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::OutsideWorkspace: return "OutsideWorkspace";
    case ErrorCode::NoToken: return "NoToken";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::RequestRejected: return "RequestRejected";
    case ErrorCode::StoreUnwritable: return "StoreUnwritable";
    case ErrorCode::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

}  // namespace gptutor
