#include "aidetect/error.hpp"

#include <atomic>
#include <iostream>

namespace aidetect {

namespace {
std::atomic<bool> g_warnings{true};
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "Io";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::InvalidLabel: return "InvalidLabel";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionUnsupported: return "VersionUnsupported";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::TrailingBytes: return "TrailingBytes";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::NonFiniteVector: return "NonFiniteVector";
    case ErrorKind::MissingId: return "MissingId";
    case ErrorKind::MissingNgramFeatures: return "MissingNgramFeatures";
    case ErrorKind::EvenKWithoutScores: return "EvenKWithoutScores";
    case ErrorKind::ModelIdMismatch: return "ModelIdMismatch";
    case ErrorKind::BadContainer: return "BadContainer";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void warn(std::string_view message) {
  if (g_warnings.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled, std::memory_order_relaxed); }

bool warnings_enabled() { return g_warnings.load(std::memory_order_relaxed); }

}  // namespace aidetect
