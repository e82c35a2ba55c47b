#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "afsp/corpus.hpp"
#include "afsp/embedding.hpp"
#include "afsp/hashing.hpp"

namespace afsp {

// Fusion weights (alpha1, alpha2, alpha3) for dense, sparse and multi-vector
// relevance.
struct Weights {
  double dense = 0.4;
  double sparse = 0.4;
  double multi = 0.2;

  // Throws InvalidArgument unless all weights are finite, non-negative and
  // at least one is positive.
  void validate() const;
};

// Parses "a1,a2,a3".
Weights parse_weights(std::string_view csv);

double score_dense(const DenseVec& q, const DenseVec& p);
// Sum over shared tokens of w_q(t) * w_p(t).
double score_sparse(const SparseWeights& q, const SparseWeights& p);
// Late interaction: mean over query rows of the best-matching demo row.
// Not symmetric.
double score_multi(const MultiVec& q, const MultiVec& p);
double score_hybrid(double s_dense, double s_sparse, double s_multi, const Weights& w);

struct IndexEntry {
  DemoPair pair;
  Representations repr;

  bool operator==(const IndexEntry&) const = default;
};

// Precomputed source-side representations of every demonstration pair,
// tied to the embedding table and projections by fingerprint.
class RetrievalIndex {
 public:
  RetrievalIndex(Digest fingerprint, std::vector<IndexEntry> entries);

  const Digest& fingerprint() const noexcept { return fingerprint_; }
  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // "AFSPIDX1", 32-byte fingerprint, u32 entry count, then per entry the
  // pair fields and its dense / sparse / multi-vector representations.
  std::string serialize() const;
  static RetrievalIndex deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static RetrievalIndex load(const std::filesystem::path& path);

  bool operator==(const RetrievalIndex&) const = default;

 private:
  Digest fingerprint_;
  std::vector<IndexEntry> entries_;
};

// One entry per pair, in corpus order. Work is spread over `workers` threads
// (0 = hardware concurrency); the result does not depend on the count.
RetrievalIndex build_index(const Corpus& corpus, const EmbeddingTable& table, const ProjectionSet& proj,
                           unsigned workers = 0);

struct ScoredDemo {
  DemoPair pair;
  std::size_t position = 0;  // corpus order
  double s_dense = 0.0;
  double s_sparse = 0.0;
  double s_multi = 0.0;
  double s_rank = 0.0;
};

struct RetrievalOptions {
  Weights weights;
  std::size_t k = 3;
  // Min-max normalize each score over the whole pool before fusion.
  bool normalize_scores = false;
};

class Retriever {
 public:
  // Throws FingerprintMismatch when the index was built from a different
  // table or projection set.
  Retriever(const RetrievalIndex& index, const EmbeddingTable& table, const ProjectionSet& proj);

  // Highest s_rank first; ties go to the earlier corpus position.
  std::vector<ScoredDemo> topk(std::string_view query, const RetrievalOptions& options) const;
  std::vector<ScoredDemo> topk(const Representations& query, const RetrievalOptions& options) const;

 private:
  const RetrievalIndex& index_;
  const EmbeddingTable& table_;
  const ProjectionSet& proj_;
};

std::vector<ScoredDemo> retrieve_topk(std::string_view query, const RetrievalIndex& index,
                                      const EmbeddingTable& table, const ProjectionSet& proj, const Weights& w,
                                      std::size_t k, bool normalize_scores = false);

}  // namespace afsp
