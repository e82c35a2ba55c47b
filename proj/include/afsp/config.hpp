#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "afsp/llm_client.hpp"
#include "afsp/metrics.hpp"
#include "afsp/reranker.hpp"
#include "afsp/retrieval.hpp"

namespace afsp {

// Whole-pipeline settings. Loaded from an INI file with one section per
// module; unknown sections or keys are rejected.
struct PipelineConfig {
  struct Paths {
    std::filesystem::path corpus;       // demonstration corpus (binary)
    std::filesystem::path table;        // embedding table
    std::filesystem::path index;        // retrieval index
    std::filesystem::path reranker;     // reranker model
    std::filesystem::path dataset;      // degeneration dataset (JSONL)
    std::filesystem::path synonyms;     // optional synonym TSV
    std::filesystem::path mock_script;  // scripted candidates for client = mock
  } paths;

  struct Embedding {
    std::size_t dim = 64;
    std::uint64_t table_seed = 0;
    std::uint64_t projection_seed = 0;
    std::uint64_t oov_seed = 0;
  } embedding;

  RetrievalOptions retrieval;
  unsigned index_workers = 0;  // 0: hardware concurrency

  struct Languages {
    std::string src = "zh";
    std::string tgt = "en";
  } languages;

  std::string client = "http";  // http | mock
  GenerationConfig generation;

  struct Degeneration {
    int max_size = 4;
    std::uint64_t seed = 0;
    std::string translator = "mock";  // mock | llm
    unsigned workers = 1;
  } degeneration;

  TrainOptions reranker;

  struct Split {
    std::size_t test_size = 0;  // 0: keep every pair as a demonstration
    std::uint64_t seed = 0;
  } split;

  metrics::TokenizeMode tokenize = metrics::TokenizeMode::kAuto;

  void validate() const;
};

// Relative paths inside the file resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view ini, const std::filesystem::path& base_dir = {});
std::string render_config(const PipelineConfig& cfg);

}  // namespace afsp
