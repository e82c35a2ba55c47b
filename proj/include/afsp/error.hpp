#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace afsp {

enum class ErrorCode {
  // corpus
  kMalformedRecord,
  kDuplicateId,
  kMixedLanguagePair,
  kEmptyFile,
  kTestSizeTooLarge,
  kIoFailure,
  kVersionMismatch,
  // embedding / retrieval
  kEmptyText,
  kZeroVector,
  kDimensionMismatch,
  kFingerprintMismatch,
  kEmptyQuery,
  // prompting
  kEmptyInput,
  kEmptyOutput,
  // degeneration
  kNoOpPerturbation,
  kMissingTranslator,
  kMissingReplacementSource,
  // reranker
  kDegenerateDataset,
  kNonFiniteLoss,
  kEmptyCandidateList,
  // llm client
  kNetworkFailure,
  kRateLimited,
  kMalformedResponse,
  kAllCandidatesEmpty,
  kScriptMiss,
  // metrics
  kLengthMismatch,
  kEmptyCorpus,
  // generic
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// True for failures caused by something outside this process (LLM endpoint,
// translator service). The CLI maps these to exit code 3.
bool is_external(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // The message without the "Code: " prefix.
  const std::string& detail() const noexcept { return detail_; }

 protected:
  Error(ErrorCode code, std::string detail, const std::string& what);

 private:
  ErrorCode code_;
  std::string detail_;
};

enum class Stage { kRetrieval, kPrompt, kGeneration, kRerank };

std::string_view stage_name(Stage stage);

// An Error raised inside one stage of the translate flow. what() carries the
// stage label, e.g. "[generation] NetworkFailure: ...".
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& inner);

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

}  // namespace afsp
