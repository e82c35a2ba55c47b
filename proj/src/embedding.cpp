#include "afsp/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"
#include "afsp/rng.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

constexpr std::string_view kTableMagic = "AFSPEMB1";

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Normalizes in place; false when the norm is zero or not finite.
bool l2_normalize(std::span<double> v) {
  const double norm = std::sqrt(dot(v, v));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    return false;
  }
  for (double& x : v) x /= norm;
  return true;
}

void require_non_empty(const TextEmbeddings& e) {
  if (e.tokens.empty() || e.vectors.rows == 0) {
    throw Error(ErrorCode::kEmptyText, "no token embeddings");
  }
}

}  // namespace

std::vector<std::string> WordCjkTokenizer::segment(std::string_view text) const {
  return text::segment_words(text);
}

const Tokenizer& default_tokenizer() {
  static const WordCjkTokenizer tokenizer;
  return tokenizer;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> vocab, std::vector<float> matrix, std::size_t dim,
                               std::uint64_t oov_seed)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)), dim_(dim), oov_seed_(oov_seed) {
  if (dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be >= 1");
  }
  if (matrix_.size() != vocab_.size() * dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix has " + std::to_string(matrix_.size()) +
                                                   " entries, expected " + std::to_string(vocab_.size() * dim_));
  }
  if (vocab_.size() >= UINT32_MAX - kOovBuckets) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary too large");
  }
  for (float x : matrix_) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument, "embedding matrix contains a non-finite entry");
    }
  }
  index_.reserve(vocab_.size());
  for (TokenId i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate vocabulary entry '" + vocab_[i] + "'");
    }
  }
}

EmbeddingTable EmbeddingTable::synthetic(std::vector<std::string> vocab, std::size_t dim, std::uint64_t seed,
                                         std::uint64_t oov_seed) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be >= 1");
  }
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<float> matrix(vocab.size() * dim);
  for (float& x : matrix) {
    x = static_cast<float>(rng.gaussian() * scale);
  }
  return EmbeddingTable(std::move(vocab), std::move(matrix), dim, oov_seed);
}

std::optional<TokenId> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId EmbeddingTable::token_id(std::string_view token) const {
  if (auto id = find(token)) return *id;
  return static_cast<TokenId>(vocab_.size() + (fnv1a64(token) % kOovBuckets));
}

std::span<const float> EmbeddingTable::row(TokenId id) const {
  if (!in_vocab(id)) {
    throw Error(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " is not in the vocabulary");
  }
  return {matrix_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::vector<double> EmbeddingTable::oov_vector(std::string_view token) const {
  Rng rng(derive_seed(oov_seed_, token));
  std::vector<double> v(dim_);
  do {
    for (double& x : v) x = rng.gaussian();
  } while (!l2_normalize(v));
  return v;
}

std::string EmbeddingTable::serialize() const {
  BinaryWriter w;
  w.magic(kTableMagic);
  w.u32(static_cast<std::uint32_t>(vocab_.size()));
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u64(oov_seed_);
  for (const auto& tok : vocab_) w.str(tok);
  for (float x : matrix_) w.f32(x);
  return w.buffer();
}

EmbeddingTable EmbeddingTable::deserialize(std::string_view bytes) {
  BinaryReader r(bytes, ErrorCode::kVersionMismatch);
  r.expect_magic(kTableMagic);
  const std::uint32_t v = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint64_t oov_seed = r.u64();
  std::vector<std::string> vocab;
  vocab.reserve(std::min<std::size_t>(v, r.remaining() / 4));
  for (std::uint32_t i = 0; i < v; ++i) vocab.push_back(r.str());
  if (r.remaining() != static_cast<std::size_t>(v) * h * sizeof(float)) {
    throw Error(ErrorCode::kVersionMismatch, "embedding matrix payload has the wrong size");
  }
  std::vector<float> matrix(static_cast<std::size_t>(v) * h);
  for (float& x : matrix) x = r.f32();
  return EmbeddingTable(std::move(vocab), std::move(matrix), h, oov_seed);
}

void EmbeddingTable::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  return dim_ == other.dim_ && oov_seed_ == other.oov_seed_ && vocab_ == other.vocab_ && matrix_ == other.matrix_;
}

ProjectionSet init_projections(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "projection dimension must be >= 1");
  }
  ProjectionSet p;
  p.dim = dim;
  p.seed = seed;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  p.w_sparse.resize(dim);
  for (double& x : p.w_sparse) x = rng.gaussian() * scale;
  p.w_multi.resize(dim * dim);
  for (double& x : p.w_multi) x = rng.gaussian() * scale;
  return p;
}

std::vector<TokenId> tokenize(const EmbeddingTable& table, std::string_view text, const Tokenizer& tokenizer) {
  if (text::is_blank(text)) {
    throw Error(ErrorCode::kEmptyText, "text is empty");
  }
  std::vector<TokenId> ids;
  for (const auto& tok : tokenizer.segment(text)) ids.push_back(table.token_id(tok));
  if (ids.empty()) {
    throw Error(ErrorCode::kEmptyText, "text has no tokens");
  }
  return ids;
}

TextEmbeddings embed_tokens(const EmbeddingTable& table, std::string_view text, const Tokenizer& tokenizer) {
  if (text::is_blank(text)) {
    throw Error(ErrorCode::kEmptyText, "text is empty");
  }
  const auto surface = tokenizer.segment(text);
  if (surface.empty()) {
    throw Error(ErrorCode::kEmptyText, "text has no tokens");
  }
  TextEmbeddings out;
  out.vectors = Matrix(surface.size(), table.dim());
  out.tokens.reserve(surface.size());
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const TokenId id = table.token_id(surface[i]);
    out.tokens.push_back(id);
    auto dst = out.vectors.row(i);
    if (table.in_vocab(id)) {
      auto src = table.row(id);
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      auto v = table.oov_vector(surface[i]);
      std::copy(v.begin(), v.end(), dst.begin());
    }
  }
  return out;
}

DenseVec dense_embed(const TextEmbeddings& e) {
  require_non_empty(e);
  DenseVec out;
  out.values.assign(e.vectors.row(0).begin(), e.vectors.row(0).end());
  for (std::size_t i = 1; i < e.vectors.rows; ++i) {
    auto r = e.vectors.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out.values[j] = std::max(out.values[j], r[j]);
  }
  if (!l2_normalize(out.values)) {
    throw Error(ErrorCode::kZeroVector, "max-pooled vector cannot be normalized");
  }
  return out;
}

SparseWeights sparse_embed(const TextEmbeddings& e, const ProjectionSet& proj) {
  require_non_empty(e);
  if (proj.dim != e.vectors.cols) {
    throw Error(ErrorCode::kDimensionMismatch, "projection dim " + std::to_string(proj.dim) +
                                                   " vs embedding dim " + std::to_string(e.vectors.cols));
  }
  std::map<TokenId, double> best;
  for (std::size_t t = 0; t < e.tokens.size(); ++t) {
    const double w = std::max(0.0, dot(proj.w_sparse, e.vectors.row(t)));
    if (w <= 0.0) continue;
    auto [it, inserted] = best.emplace(e.tokens[t], w);
    if (!inserted) it->second = std::max(it->second, w);
  }
  SparseWeights out;
  out.weights.assign(best.begin(), best.end());
  return out;
}

MultiVec multi_embed(const TextEmbeddings& e, const ProjectionSet& proj) {
  require_non_empty(e);
  const std::size_t h = e.vectors.cols;
  if (proj.dim != h) {
    throw Error(ErrorCode::kDimensionMismatch, "projection dim " + std::to_string(proj.dim) +
                                                   " vs embedding dim " + std::to_string(h));
  }
  MultiVec out;
  out.rows = Matrix(e.vectors.rows, h);
  for (std::size_t i = 0; i < e.vectors.rows; ++i) {
    auto in = e.vectors.row(i);
    auto dst = out.rows.row(i);
    // dst[j] = sum_k W[k][j] * in[k]
    for (std::size_t k = 0; k < h; ++k) {
      const double x = in[k];
      const double* w_row = proj.w_multi.data() + k * h;
      for (std::size_t j = 0; j < h; ++j) dst[j] += w_row[j] * x;
    }
    if (!l2_normalize(dst)) {
      throw Error(ErrorCode::kZeroVector, "projected token " + std::to_string(i) + " cannot be normalized");
    }
  }
  return out;
}

Representations represent(const EmbeddingTable& table, const ProjectionSet& proj, std::string_view text,
                          const Tokenizer& tokenizer) {
  const auto e = embed_tokens(table, text, tokenizer);
  return {dense_embed(e), sparse_embed(e, proj), multi_embed(e, proj)};
}

Digest model_fingerprint(const EmbeddingTable& table, const ProjectionSet& proj) {
  Sha256 h;
  h.update(table.serialize());
  h.update_pod(static_cast<std::uint64_t>(proj.dim));
  h.update_pod(proj.seed);
  h.update(std::as_bytes(std::span<const double>(proj.w_sparse)));
  h.update(std::as_bytes(std::span<const double>(proj.w_multi)));
  return h.finish();
}

}  // namespace afsp
