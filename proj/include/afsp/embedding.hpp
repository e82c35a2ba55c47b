#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "afsp/hashing.hpp"

namespace afsp {

using TokenId = std::uint32_t;

// OOV ids live in [V, V + 2^20).
inline constexpr std::uint32_t kOovBuckets = 1u << 20;

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

// Splits text into surface tokens. Implementations must be deterministic.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> segment(std::string_view text) const = 0;
};

// Lowercased Unicode words for alphabetic scripts, one token per CJK
// character, punctuation dropped.
class WordCjkTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> segment(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

class EmbeddingTable {
 public:
  EmbeddingTable(std::vector<std::string> vocab, std::vector<float> matrix, std::size_t dim,
                 std::uint64_t oov_seed);

  // Seeded N(0, 1/dim) rows over the given vocabulary.
  static EmbeddingTable synthetic(std::vector<std::string> vocab, std::size_t dim, std::uint64_t seed,
                                  std::uint64_t oov_seed);

  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t oov_seed() const noexcept { return oov_seed_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  const std::vector<float>& matrix() const noexcept { return matrix_; }

  std::optional<TokenId> find(std::string_view token) const;
  // Vocabulary id, or V + (fnv1a64(token) mod 2^20) for unknown tokens.
  TokenId token_id(std::string_view token) const;
  bool in_vocab(TokenId id) const noexcept { return id < vocab_.size(); }
  std::span<const float> row(TokenId id) const;
  // Unit-norm Gaussian vector keyed by (oov_seed, token).
  std::vector<double> oov_vector(std::string_view token) const;

  std::string serialize() const;
  static EmbeddingTable deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static EmbeddingTable load(const std::filesystem::path& path);

  bool operator==(const EmbeddingTable& other) const;

 private:
  std::vector<std::string> vocab_;
  std::vector<float> matrix_;
  std::size_t dim_;
  std::uint64_t oov_seed_;
  std::unordered_map<std::string, TokenId> index_;
};

struct ProjectionSet {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> w_sparse;  // H
  std::vector<double> w_multi;   // H x H, row-major: w_multi[k * H + j]

  bool operator==(const ProjectionSet&) const = default;
};

// i.i.d. N(0, 1/H) entries; w_sparse is drawn first, then w_multi row by row.
ProjectionSet init_projections(std::size_t dim, std::uint64_t seed);

struct TextEmbeddings {
  std::vector<TokenId> tokens;
  Matrix vectors;  // tokens.size() x H
};

struct DenseVec {
  std::vector<double> values;
  bool operator==(const DenseVec&) const = default;
};

// Sorted by token id; zero weights are never stored.
struct SparseWeights {
  std::vector<std::pair<TokenId, double>> weights;
  bool operator==(const SparseWeights&) const = default;
};

struct MultiVec {
  Matrix rows;
  bool operator==(const MultiVec&) const = default;
};

std::vector<TokenId> tokenize(const EmbeddingTable& table, std::string_view text,
                              const Tokenizer& tokenizer = default_tokenizer());

TextEmbeddings embed_tokens(const EmbeddingTable& table, std::string_view text,
                            const Tokenizer& tokenizer = default_tokenizer());

// norm(MaxPooling(E)).
DenseVec dense_embed(const TextEmbeddings& e);
// ReLU(w_sparse . E[t]) per token, max over repeated occurrences.
SparseWeights sparse_embed(const TextEmbeddings& e, const ProjectionSet& proj);
// Row i = norm(W_multi^T E[i]).
MultiVec multi_embed(const TextEmbeddings& e, const ProjectionSet& proj);

struct Representations {
  DenseVec dense;
  SparseWeights sparse;
  MultiVec multi;

  bool operator==(const Representations&) const = default;
};

Representations represent(const EmbeddingTable& table, const ProjectionSet& proj, std::string_view text,
                          const Tokenizer& tokenizer = default_tokenizer());

// SHA-256 over the table contents and the projection matrices.
Digest model_fingerprint(const EmbeddingTable& table, const ProjectionSet& proj);

}  // namespace afsp
