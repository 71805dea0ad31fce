#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umm {

enum class ErrorCode {
  InvalidRequest,
  DuplicateAdapter,
  NotRegistered,
  ConfigError,
  LoadError,
  CapabilityError,
  AdapterFailure,
  NotLoaded,
  ParseError,
  UnknownKey,
  TypeMismatch,
  KindMismatch,
  ManifestMismatch,
  PipelineAborted,
  JudgeUnavailable,
  ParseFailure,
  DegenerateRephrase,
  PreconditionFailed,
  Misaligned,
  EmptyInput,
  WeightMismatch,
  UnknownBenchmark,
  MethodNotRegistered,
  NotTrainable,
  TrainingDiverged,
  NotImplemented,
  MissingCheckpoint,
  NoLatentSupport,
  SpanEmpty,
  MixedBenchmarks,
  OddQuestionCount,
  ExternalScorerFailed,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. The code is stable and machine
/// checkable; the message names the offending key, sample, or invariant.
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

}  // namespace umm
