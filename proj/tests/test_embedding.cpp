#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "afsp/embedding.hpp"
#include "afsp/error.hpp"
#include "afsp/hashing.hpp"

using namespace afsp;

namespace {

TextEmbeddings from_rows(std::vector<std::vector<double>> rows, std::vector<TokenId> ids = {}) {
  TextEmbeddings e;
  e.vectors = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), e.vectors.row(i).begin());
    e.tokens.push_back(ids.empty() ? static_cast<TokenId>(i) : ids[i]);
  }
  return e;
}

ProjectionSet projections(std::vector<double> w_sparse, std::vector<double> w_multi) {
  ProjectionSet p;
  p.dim = w_sparse.size();
  p.w_sparse = std::move(w_sparse);
  p.w_multi = std::move(w_multi);
  return p;
}

EmbeddingTable small_table() {
  return EmbeddingTable::synthetic({"hello", "world", "你", "好", "世", "界", "the", "cat", "sat"}, 64, 3, 4);
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(Tokenize, WordsAndCjk) {
  const auto table = small_table();
  EXPECT_EQ(tokenize(table, "Hello, world"), (std::vector<TokenId>{*table.find("hello"), *table.find("world")}));
  EXPECT_EQ(tokenize(table, "你好世界").size(), 4u);
}

TEST(Tokenize, OovIdRule) {
  const auto table = small_table();
  const auto ids = tokenize(table, "zebra");
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(ids[0], table.vocab_size() + fnv1a64("zebra") % kOovBuckets);
  EXPECT_FALSE(table.in_vocab(ids[0]));
}

TEST(Tokenize, EmptyTextThrows) {
  const auto table = small_table();
  EXPECT_THROW(tokenize(table, "   "), Error);
  EXPECT_THROW(embed_tokens(table, ""), Error);
}

TEST(EmbedTokens, RowsMatchTable) {
  const auto table = small_table();
  const auto e = embed_tokens(table, "cat");
  ASSERT_EQ(e.vectors.rows, 1u);
  const auto row = table.row(*table.find("cat"));
  for (std::size_t j = 0; j < 64; ++j) EXPECT_EQ(e.vectors.row(0)[j], static_cast<double>(row[j]));
  EXPECT_EQ(embed_tokens(table, "the cat sat hello world").vectors.rows, 5u);
}

TEST(EmbedTokens, OovVectorIsUnitAndDeterministic) {
  const auto table = small_table();
  const auto a = embed_tokens(table, "zebra");
  const auto b = embed_tokens(table, "zebra");
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_NEAR(norm(a.vectors.row(0)), 1.0, 1e-12);
  const auto other_seed = EmbeddingTable::synthetic(table.vocab(), 64, 3, 99);
  EXPECT_FALSE(embed_tokens(other_seed, "zebra").vectors == a.vectors);
}

TEST(DenseEmbed, HandCases) {
  auto d = dense_embed(from_rows({{1, 0}, {0, 1}}));
  EXPECT_NEAR(d.values[0], std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(d.values[1], std::sqrt(0.5), 1e-12);
  d = dense_embed(from_rows({{3, 4}, {-3, -4}}));
  EXPECT_NEAR(d.values[0], 0.6, 1e-12);
  EXPECT_NEAR(d.values[1], 0.8, 1e-12);
  d = dense_embed(from_rows({{0, 2}}));
  EXPECT_EQ(d.values, (std::vector<double>{0, 1}));
}

TEST(DenseEmbed, ZeroVector) {
  try {
    dense_embed(from_rows({{0, 0}, {-1, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
}

TEST(SparseEmbed, HandCases) {
  const auto proj = projections({1, 0}, {1, 0, 0, 1});
  auto s = sparse_embed(from_rows({{2, 5}}), proj);
  ASSERT_EQ(s.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(s.weights[0].second, 2.0);
  s = sparse_embed(from_rows({{-1, 5}}), proj);
  EXPECT_TRUE(s.weights.empty());
  s = sparse_embed(from_rows({{0.3, 0}, {0.7, 0}}, {7, 7}), proj);
  ASSERT_EQ(s.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(s.weights[0].second, 0.7);
}

TEST(MultiEmbed, IdentityProjectionNormalizesRows) {
  const auto proj = projections({0, 0}, {1, 0, 0, 1});
  const auto m = multi_embed(from_rows({{3, 4}, {0, 2}, {1, 1}}), proj);
  ASSERT_EQ(m.rows.rows, 3u);
  EXPECT_NEAR(m.rows.row(0)[0], 0.6, 1e-12);
  EXPECT_NEAR(m.rows.row(0)[1], 0.8, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(norm(m.rows.row(i)), 1.0, 1e-12);
}

TEST(MultiEmbed, UsesTransposedProjection) {
  // W = [[1, 2], [0, 1]] (row k, column j); W^T [1, 0] = [1, 2].
  const auto proj = projections({0, 0}, {1, 2, 0, 1});
  const auto m = multi_embed(from_rows({{1, 0}}), proj);
  EXPECT_NEAR(m.rows.row(0)[0], 1 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(m.rows.row(0)[1], 2 / std::sqrt(5.0), 1e-12);
}

TEST(MultiEmbed, DimensionMismatch) {
  const auto proj = projections({0, 0, 0}, std::vector<double>(9, 1.0));
  EXPECT_THROW(multi_embed(from_rows({{1, 0}}), proj), Error);
}

TEST(MultiEmbed, DeterministicOnSeededTable) {
  const auto table = EmbeddingTable::synthetic({"a", "b"}, 8, 5, 6);
  const auto proj = init_projections(8, 5);
  EXPECT_EQ(multi_embed(embed_tokens(table, "a b"), proj), multi_embed(embed_tokens(table, "a b"), proj));
}

TEST(Projections, DeterministicAndShaped) {
  EXPECT_EQ(init_projections(4, 1), init_projections(4, 1));
  EXPECT_FALSE(init_projections(4, 1) == init_projections(4, 2));
  const auto p1 = init_projections(1, 0);
  EXPECT_EQ(p1.w_sparse.size(), 1u);
  EXPECT_EQ(p1.w_multi.size(), 1u);
}

TEST(Projections, GaussianMomentsForH256) {
  const std::size_t h = 256;
  const auto p = init_projections(h, 123);
  double sum = 0.0, sq = 0.0;
  for (double x : p.w_multi) {
    sum += x;
    sq += x * x;
  }
  const double n = static_cast<double>(p.w_multi.size());
  const double sigma_of_mean = (1.0 / std::sqrt(double(h))) / std::sqrt(n);
  EXPECT_LT(std::abs(sum / n), 3.0 * sigma_of_mean);
  EXPECT_NEAR(sq / n, 1.0 / double(h), 0.05 / double(h));
}

TEST(Represent, DenseAlwaysUnitNorm) {
  const auto table = small_table();
  const auto proj = init_projections(64, 9);
  for (const char* text : {"hello", "the cat sat", "你好世界", "unknown words only", "hello 你 zebra"}) {
    const auto r = represent(table, proj, text);
    EXPECT_NEAR(norm(r.dense.values), 1.0, 1e-6) << text;
    for (const auto& [id, w] : r.sparse.weights) EXPECT_GT(w, 0.0);
  }
}

TEST(EmbeddingTable, BinaryRoundTrip) {
  const auto table = small_table();
  const auto bytes = table.serialize();
  EXPECT_EQ(bytes.substr(0, 8), "AFSPEMB1");
  EXPECT_EQ(EmbeddingTable::deserialize(bytes), table);
  const auto path = std::filesystem::temp_directory_path() / "afsp_table_test.emb";
  table.save(path);
  EXPECT_EQ(EmbeddingTable::load(path), table);
  std::filesystem::remove(path);
}

TEST(EmbeddingTable, RejectsBadInput) {
  EXPECT_THROW(EmbeddingTable({"a", "a"}, std::vector<float>(4, 0.f), 2, 0), Error);
  EXPECT_THROW(EmbeddingTable({"a"}, std::vector<float>(3, 0.f), 2, 0), Error);
  EXPECT_THROW(EmbeddingTable({"a"}, {NAN, 0.f}, 2, 0), Error);
  const auto bytes = small_table().serialize();
  EXPECT_THROW(EmbeddingTable::deserialize(bytes.substr(0, bytes.size() / 2)), Error);
}

TEST(Fingerprint, ChangesWithTableOrProjection) {
  const auto table = small_table();
  const auto fp = model_fingerprint(table, init_projections(64, 1));
  EXPECT_EQ(fp, model_fingerprint(table, init_projections(64, 1)));
  EXPECT_NE(fp, model_fingerprint(table, init_projections(64, 2)));
  EXPECT_NE(fp, model_fingerprint(EmbeddingTable::synthetic(table.vocab(), 64, 4, 4), init_projections(64, 1)));
}
