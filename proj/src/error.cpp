#include "eegscreen/error.hpp"

namespace eegscreen {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnknownChannel: return "UnknownChannel";
    case Errc::MissingChannel: return "MissingChannel";
    case Errc::DuplicateChannel: return "DuplicateChannel";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::NonFiniteSample: return "NonFiniteSample";
    case Errc::BadHeader: return "BadHeader";
    case Errc::DuplicateSubject: return "DuplicateSubject";
    case Errc::MissingFile: return "MissingFile";
    case Errc::BadLabel: return "BadLabel";
    case Errc::BadBand: return "BadBand";
    case Errc::NyquistViolation: return "NyquistViolation";
    case Errc::TooShort: return "TooShort";
    case Errc::InsufficientLength: return "InsufficientLength";
    case Errc::EmptySignal: return "EmptySignal";
    case Errc::BadGrid: return "BadGrid";
    case Errc::TooFewTimePoints: return "TooFewTimePoints";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::GraphCycle: return "GraphCycle";
    case Errc::BadConfig: return "BadConfig";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::TooFewSubjects: return "TooFewSubjects";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::UntrainedModel: return "UntrainedModel";
    case Errc::SubjectLeakage: return "SubjectLeakage";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::UnknownTrial: return "UnknownTrial";
    case Errc::DuplicateResponse: return "DuplicateResponse";
    case Errc::NonPositiveReactionTime: return "NonPositiveReactionTime";
    case Errc::ImplausibleReactionTime: return "ImplausibleReactionTime";
    case Errc::OutOfDomainResponse: return "OutOfDomainResponse";
    case Errc::SessionIncomplete: return "SessionIncomplete";
    case Errc::NoModelLoaded: return "NoModelLoaded";
    case Errc::BadFormat: return "BadFormat";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) {
  switch (code) {
    case Errc::GraphCycle:
    case Errc::SubjectLeakage:
    case Errc::Io:
    case Errc::NoModelLoaded:
      return false;
    default:
      return true;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace eegscreen
