#pragma once

#include <stdexcept>
#include <string>

namespace discovery {

// Stable error codes. The string forms are part of the service's error
// payloads and must not change.
enum class ErrorCode {
  invalid_input,
  invalid_config,
  capacity,
  unsupported_mode,
  parse,
  normalization,
  dangling_fact,
  not_found,
  conflict,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::unsupported_mode: return "unsupported_mode";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::dangling_fact: return "dangling_fact";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_input(const std::string& msg) { return {ErrorCode::invalid_input, msg}; }
inline Error invalid_config(const std::string& msg) { return {ErrorCode::invalid_config, msg}; }

}  // namespace discovery
