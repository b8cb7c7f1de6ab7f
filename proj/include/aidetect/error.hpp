#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aidetect {

enum class ErrorKind {
  Io,
  MissingColumn,
  InvalidLabel,
  DuplicateId,
  DegenerateSplit,
  EmptyVocabulary,
  WidthMismatch,
  RowMismatch,
  ShapeMismatch,
  IndexOutOfRange,
  EmptyTrainingSet,
  NonFiniteLoss,
  LengthMismatch,
  SingleClass,
  BadMagic,
  VersionUnsupported,
  Truncated,
  TrailingBytes,
  ChecksumMismatch,
  NonFiniteVector,
  MissingId,
  MissingNgramFeatures,
  EvenKWithoutScores,
  ModelIdMismatch,
  BadContainer,
  BadConfig,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it to an exit code (Io -> 1, everything else -> 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Warnings go to standard error unless silenced (tests silence them).
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);
bool warnings_enabled();

}  // namespace aidetect
