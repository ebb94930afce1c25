#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idpf {

enum class ErrorCode {
  InvalidTerm,
  SpanOutOfBounds,
  OverlappingSpans,
  FileNotFound,
  InvalidEncoding,
  EmptyVocabulary,
  UnknownUser,
  UnknownApp,
  UsernameTaken,
  WeakPassword,
  InvalidCredentials,
  InvalidSession,
  UnknownApiKey,
  PermissionNotGranted,
  TextTooLarge,
  BadRequest,
  BadHeader,
  EmptyDataset,
  EmptyWordSource,
  StrategyMismatch,
  BadMapping,
  Storage,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTerm: return "InvalidTerm";
    case ErrorCode::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorCode::OverlappingSpans: return "OverlappingSpans";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::UnknownApp: return "UnknownApp";
    case ErrorCode::UsernameTaken: return "UsernameTaken";
    case ErrorCode::WeakPassword: return "WeakPassword";
    case ErrorCode::InvalidCredentials: return "InvalidCredentials";
    case ErrorCode::InvalidSession: return "InvalidSession";
    case ErrorCode::UnknownApiKey: return "UnknownApiKey";
    case ErrorCode::PermissionNotGranted: return "PermissionNotGranted";
    case ErrorCode::TextTooLarge: return "TextTooLarge";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyWordSource: return "EmptyWordSource";
    case ErrorCode::StrategyMismatch: return "StrategyMismatch";
    case ErrorCode::BadMapping: return "BadMapping";
    case ErrorCode::Storage: return "Storage";
  }
  return "Unknown";
}

// Every failure in the library surfaces as an Error carrying a stable code;
// the HTTP layer maps codes to status lines and the {"error","detail"} body.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace idpf
