#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mudslide {

enum class ErrorCode {
  UnknownRating,
  UnknownMode,
  InvalidRoot,
  InvalidOptions,
  BadSlideIndex,
  EmptyGallery,
  UnreadableImage,
  IoError,
  UnknownLecture,
  ValidationFailed,
  CapacityReached,
  Malformed,
};

std::string_view to_string(ErrorCode code);

// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mudslide
