#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegscreen {

// Every failure the library reports carries one of these codes. The CLI maps
// them to exit codes and the HTTP service maps them to status codes.
enum class Errc {
  // eeg_io
  UnknownChannel,
  MissingChannel,
  DuplicateChannel,
  RaggedRows,
  NonFiniteSample,
  BadHeader,
  DuplicateSubject,
  MissingFile,
  BadLabel,
  // preprocess
  BadBand,
  NyquistViolation,
  TooShort,
  InsufficientLength,
  // cwt
  EmptySignal,
  BadGrid,
  TooFewTimePoints,
  // nn / classifier
  ShapeMismatch,
  GraphCycle,
  BadConfig,
  SingleClassDataset,
  EmptyDataset,
  // evaluation / importance
  TooFewSubjects,
  LengthMismatch,
  EmptyTestSet,
  UntrainedModel,
  SubjectLeakage,
  // screening service
  UnknownSession,
  UnknownTrial,
  DuplicateResponse,
  NonPositiveReactionTime,
  ImplausibleReactionTime,
  OutOfDomainResponse,
  SessionIncomplete,
  NoModelLoaded,
  // files
  BadFormat,
  Io,
};

std::string_view to_string(Errc code);

// True for codes caused by invalid input rather than a runtime fault.
bool is_validation_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace eegscreen
