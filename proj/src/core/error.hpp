#pragma once

#include <stdexcept>
#include <string>

namespace mmt {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  TooFewPoints,
  DegenerateConfiguration,
  BehindCamera,
  NonPositiveDepth,
  ResolutionMismatch,
  NoVisibleSample,
  EmptyForeground,
  LabelOutOfRange,
  LabelCountMismatch,
  DimensionMismatch,
  IndexOutOfRange,
  InvalidSeed,
  InvalidSpec,
  EmptyCloud,
  DegenerateCloud,
  EmptySequence,
  TooSmall,
  Unsupported,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying a stable error code alongside the human-readable text.
/// The C layer maps the code onto its status enum one to one.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::NoVisibleSample: return "NoVisibleSample";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::LabelCountMismatch: return "LabelCountMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidSeed: return "InvalidSeed";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "UnknownError";
}

}  // namespace mmt
