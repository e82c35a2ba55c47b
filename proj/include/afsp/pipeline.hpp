#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "afsp/embedding.hpp"
#include "afsp/llm_client.hpp"
#include "afsp/reranker.hpp"
#include "afsp/retrieval.hpp"

namespace afsp {

struct ScoredCandidate {
  std::string text;
  std::optional<double> score;  // absent when the reranker was bypassed
};

struct TranslationResult {
  std::string best;
  std::vector<ScoredCandidate> candidates;  // generation order
  std::vector<std::string> demos_used;      // retrieval rank order
  std::string prompt_fingerprint;

  // {"input":..., "demos":[...], "candidates":[{"text":...,"score":...}], "best":...}
  nlohmann::json audit_record(std::string_view input) const;
};

struct TranslateOptions {
  RetrievalOptions retrieval;
  GenerationConfig generation;
  std::string src_lang;  // language codes
  std::string tgt_lang;
};

struct BatchSummary {
  std::size_t count = 0;
  std::size_t failures = 0;
  std::chrono::duration<double> wall_time{0};

  nlohmann::json to_json() const;
};

// Retrieve -> prompt -> generate -> rerank. All referenced components are
// borrowed and must outlive the pipeline; they are only read.
class Pipeline {
 public:
  // `index`, `table` and `proj` may be null when retrieval.k == 0; `scorer`
  // may be null when n_candidates == 1.
  Pipeline(const RetrievalIndex* index, const EmbeddingTable* table, const ProjectionSet* proj,
           const GenerationClient& client, const QualityScorer* scorer, TranslateOptions options);

  // Throws StageError.
  TranslationResult translate(std::string_view source) const;

  // One output line per input line, in order. Failed lines are written empty
  // and reported to `log`. Throws IoFailure.
  BatchSummary translate_file(const std::filesystem::path& input, const std::filesystem::path& output,
                              const std::optional<std::filesystem::path>& audit = std::nullopt,
                              std::ostream* log = nullptr) const;

  const TranslateOptions& options() const noexcept { return options_; }

 private:
  std::optional<Retriever> retriever_;
  const GenerationClient& client_;
  const QualityScorer* scorer_;
  TranslateOptions options_;
};

}  // namespace afsp
