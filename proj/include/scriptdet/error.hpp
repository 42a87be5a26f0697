#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scriptdet {

enum class ErrorCode {
  MalformedLine,
  UnknownScript,
  ConfidenceOutOfRange,
  DimensionMismatch,
  DuplicateRegionId,
  NonFiniteValue,
  MissingClass,
  DegenerateQuad,
  QuadOutsideImage,
  InvalidThreshold,
  ZeroNormVector,
  EmptyAllowedSet,
  EmptyClassSet,
  MissingEmbedding,
  EmptyInput,
  MalformedMatrix,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the toolkit carries one of the codes above so
/// callers (and tests) can tell error kinds apart without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scriptdet
