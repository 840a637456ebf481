#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace focus {

enum class Errc {
  UnknownProfile,
  KOutOfRange,
  NonPositiveM,
  InvalidConfig,
  MissingTrueClass,
  EmptyHistogram,
  DimensionMismatch,
  DuplicateClusterId,
  KxTooLarge,
  UnknownClass,
  NonMonotoneSchedule,
  SignatureLengthMismatch,
  EmptySample,
  NoViableConfig,
  EmptyViableSet,
  InvalidSpec,
  IoError,
  FormatError,
  FormatVersionMismatch,
  ChecksumMismatch,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace focus
