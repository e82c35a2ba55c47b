#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "afsp/binary_io.hpp"
#include "afsp/corpus.hpp"
#include "afsp/error.hpp"

using namespace afsp;

namespace {

Corpus make(std::size_t n) {
  std::vector<DemoPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back({"p" + std::to_string(i), "源" + std::to_string(i), "tgt " + std::to_string(i), "zh", "en"});
  }
  return Corpus(std::move(pairs));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Corpus, ParsesJsonl) {
  const auto c = parse_corpus(
      R"({"id":"0001","src":"你好","tgt":"Hello","src_lang":"zh","tgt_lang":"en"})"
      "\n\n"
      R"({"id":"0002","src":"谢谢","tgt":"Thanks","src_lang":"zh","tgt_lang":"en"})"
      "\n",
      CorpusFormat::kJsonl);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1].id, "0002");
  EXPECT_EQ(c[1].tgt_text, "Thanks");
  EXPECT_EQ(c.src_lang(), "zh");
  ASSERT_NE(c.find("0001"), nullptr);
  EXPECT_EQ(c.find("0001")->src_text, "你好");
  EXPECT_EQ(c.find("nope"), nullptr);
}

TEST(Corpus, TsvWithAndWithoutIds) {
  const auto with_ids = parse_corpus("a\t你好\tHello\tzh\ten\nb\t谢谢\tThanks\tzh\ten\n", CorpusFormat::kTsv);
  EXPECT_EQ(with_ids[0].id, "a");
  const auto without = parse_corpus("你好\tHello\tzh\ten\n谢谢\tThanks\tzh\ten\n", CorpusFormat::kTsv);
  EXPECT_EQ(without[0].id, "0001");
  EXPECT_EQ(without[1].id, "0002");
}

TEST(Corpus, Errors) {
  EXPECT_EQ(code_of([] { parse_corpus("", CorpusFormat::kJsonl); }), ErrorCode::kEmptyFile);
  EXPECT_EQ(code_of([] { parse_corpus("{not json}\n", CorpusFormat::kJsonl); }), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code_of([] { parse_corpus(R"({"id":"1","src":"a","src_lang":"zh","tgt_lang":"en"})", CorpusFormat::kJsonl); }),
            ErrorCode::kMalformedRecord);
  EXPECT_EQ(code_of([] { parse_corpus("x\ty\n", CorpusFormat::kTsv); }), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code_of([] { parse_corpus("1\ta\tb\tzh\ten\n1\tc\td\tzh\ten\n", CorpusFormat::kTsv); }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([] { parse_corpus("1\ta\tb\tzh\ten\n2\tc\td\tja\ten\n", CorpusFormat::kTsv); }),
            ErrorCode::kMixedLanguagePair);
}

TEST(Corpus, MalformedRecordNamesLine) {
  try {
    parse_corpus("a\tb\tzh\ten\nbroken\n", CorpusFormat::kTsv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, SplitSizesAndDisjointness) {
  const auto c = make(1000);
  const auto s = split(c, 500, 42);
  EXPECT_EQ(s.test.size(), 500u);
  EXPECT_EQ(s.demo.size(), 500u);
  std::set<std::string> ids;
  for (const auto& p : s.test.pairs()) ids.insert(p.id);
  for (const auto& p : s.demo.pairs()) EXPECT_EQ(ids.count(p.id), 0u);
}

TEST(Corpus, SplitIsDeterministicAndSeedSensitive) {
  const auto c = make(200);
  EXPECT_EQ(split(c, 20, 7).test, split(c, 20, 7).test);
  EXPECT_FALSE(split(c, 20, 7).test == split(c, 20, 8).test);
}

TEST(Corpus, SplitKeepsCorpusOrder) {
  const auto s = split(make(50), 10, 1);
  auto pos = [](const std::string& id) { return std::stoi(id.substr(1)); };
  for (std::size_t i = 1; i < s.test.size(); ++i) EXPECT_LT(pos(s.test[i - 1].id), pos(s.test[i].id));
}

TEST(Corpus, SplitErrors) {
  const auto c = make(5);
  EXPECT_EQ(code_of([&] { split(c, 5, 0); }), ErrorCode::kTestSizeTooLarge);
  EXPECT_EQ(code_of([&] { split(c, 0, 0); }), ErrorCode::kInvalidArgument);
}

TEST(Corpus, BinaryRoundTrip) {
  const auto c = make(17);
  const auto bytes = serialize_corpus(c);
  EXPECT_EQ(bytes.substr(0, 8), "AFSPCOR1");
  EXPECT_EQ(deserialize_corpus(bytes), c);
  const auto path = std::filesystem::temp_directory_path() / "afsp_corpus_test.bin";
  save(c, path);
  EXPECT_EQ(load_corpus(path), c);
  std::filesystem::remove(path);
}

TEST(Corpus, BinaryRejectsDamage) {
  const auto bytes = serialize_corpus(make(3));
  EXPECT_THROW(deserialize_corpus(bytes.substr(0, bytes.size() - 3)), Error);
  EXPECT_EQ(code_of([&] { deserialize_corpus("AFSPCOR9" + bytes.substr(8)); }), ErrorCode::kVersionMismatch);
}

TEST(Corpus, MissingFileIsIoFailure) {
  EXPECT_EQ(code_of([] { ingest("/nonexistent/afsp.jsonl", CorpusFormat::kJsonl); }), ErrorCode::kIoFailure);
}

TEST(Corpus, JsonlExportReparses) {
  const auto c = make(4);
  EXPECT_EQ(parse_corpus(to_jsonl(c), CorpusFormat::kJsonl), c);
}
