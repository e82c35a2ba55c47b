#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "afsp/config.hpp"
#include "afsp/error.hpp"

using namespace afsp;

TEST(Config, DefaultsWhenEmpty) {
  const auto c = parse_config("");
  EXPECT_EQ(c.retrieval.k, 3u);
  EXPECT_DOUBLE_EQ(c.retrieval.weights.dense, 0.4);
  EXPECT_DOUBLE_EQ(c.retrieval.weights.sparse, 0.4);
  EXPECT_DOUBLE_EQ(c.retrieval.weights.multi, 0.2);
  EXPECT_EQ(c.generation.n_candidates, 30u);
  EXPECT_DOUBLE_EQ(c.generation.temperature, 0.8);
  EXPECT_DOUBLE_EQ(c.generation.top_p, 0.95);
  EXPECT_EQ(c.degeneration.max_size, 4);
  EXPECT_EQ(c.reranker.batch_size, 32u);
  EXPECT_EQ(c.reranker.epochs, 20u);
  EXPECT_DOUBLE_EQ(c.reranker.learning_rate, 0.1);
  EXPECT_EQ(c.client, "http");
  EXPECT_EQ(c.split.test_size, 0u);
}

TEST(Config, ParsesEverySection) {
  const auto c = parse_config(R"(
[paths]
corpus = data/demo.cor
synonyms = /abs/syn.tsv
[embedding]
dim = 32
table_seed = 5
[retrieval]
weights = 1,0,0
k = 5
normalize_scores = true
[languages]
src = en
tgt = de
[generation]
client = mock
n_candidates = 8
top_k = 30
timeout = 2.5
[degeneration]
max_size = 2
translator = llm
[reranker]
optimizer = sgd
feature_dim = 1024
[split]
test_size = 100
seed = 9
[metrics]
tokenize = char
)",
                              "/base");
  EXPECT_EQ(c.paths.corpus, std::filesystem::path("/base/data/demo.cor"));
  EXPECT_EQ(c.paths.synonyms, std::filesystem::path("/abs/syn.tsv"));
  EXPECT_TRUE(c.paths.index.empty());
  EXPECT_EQ(c.embedding.dim, 32u);
  EXPECT_DOUBLE_EQ(c.retrieval.weights.dense, 1.0);
  EXPECT_EQ(c.retrieval.k, 5u);
  EXPECT_TRUE(c.retrieval.normalize_scores);
  EXPECT_EQ(c.languages.tgt, "de");
  EXPECT_EQ(c.client, "mock");
  EXPECT_EQ(c.generation.n_candidates, 8u);
  EXPECT_EQ(c.generation.top_k, 30);
  EXPECT_DOUBLE_EQ(c.generation.timeout_seconds, 2.5);
  EXPECT_EQ(c.degeneration.max_size, 2);
  EXPECT_EQ(c.degeneration.translator, "llm");
  EXPECT_EQ(c.reranker.optimizer, Optimizer::kSgd);
  EXPECT_EQ(c.reranker.feature_dim, 1024u);
  EXPECT_EQ(c.split.test_size, 100u);
  EXPECT_EQ(c.tokenize, metrics::TokenizeMode::kChar);
}

TEST(Config, RejectsUnknownAndInvalid) {
  for (const char* bad : {"[retrieval]\nkk = 3\n", "[nope]\nx = 1\n", "stray = 1\n", "[retrieval]\nk = three\n",
                          "[retrieval]\nweights = 0,0,0\n", "[degeneration]\nmax_size = 7\n",
                          "[generation]\nclient = grpc\n", "[embedding]\ndim = -4\n", "[generation]\ntop_p = 0\n",
                          "[retrieval\nk = 1\n"}) {
    try {
      parse_config(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument) << bad;
    }
  }
}

TEST(Config, RenderRoundTrips) {
  auto c = parse_config("[retrieval]\nk = 7\n[generation]\ntop_k = 12\n[reranker]\noptimizer = sgd\n");
  const auto again = parse_config(render_config(c));
  EXPECT_EQ(render_config(again), render_config(c));
  EXPECT_EQ(again.retrieval.k, 7u);
  EXPECT_EQ(again.generation.top_k, 12);
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "afsp_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "run.ini") << "[paths]\nindex = out/demo.idx\n";
  const auto c = load_config(dir / "run.ini");
  EXPECT_EQ(c.paths.index, dir / "out/demo.idx");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_config(dir / "missing.ini"), Error);
}
