#include "afsp/error.hpp"

#include <utility>

namespace afsp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMixedLanguagePair: return "MixedLanguagePair";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kTestSizeTooLarge: return "TestSizeTooLarge";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kFingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyOutput: return "EmptyOutput";
    case ErrorCode::kNoOpPerturbation: return "NoOpPerturbation";
    case ErrorCode::kMissingTranslator: return "MissingTranslator";
    case ErrorCode::kMissingReplacementSource: return "MissingReplacementSource";
    case ErrorCode::kDegenerateDataset: return "DegenerateDataset";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kEmptyCandidateList: return "EmptyCandidateList";
    case ErrorCode::kNetworkFailure: return "NetworkFailure";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kAllCandidatesEmpty: return "AllCandidatesEmpty";
    case ErrorCode::kScriptMiss: return "ScriptMiss";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_external(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNetworkFailure:
    case ErrorCode::kRateLimited:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kAllCandidatesEmpty:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : Error(code, message, std::string(error_code_name(code)) + ": " + message) {}

Error::Error(ErrorCode code, std::string detail, const std::string& what)
    : std::runtime_error(what), code_(code), detail_(std::move(detail)) {}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kRetrieval: return "retrieval";
    case Stage::kPrompt: return "prompt";
    case Stage::kGeneration: return "generation";
    case Stage::kRerank: return "rerank";
  }
  return "unknown";
}

StageError::StageError(Stage stage, const Error& inner)
    : Error(inner.code(), inner.detail(),
            "[" + std::string(stage_name(stage)) + "] " + inner.what()),
      stage_(stage) {}

}  // namespace afsp
