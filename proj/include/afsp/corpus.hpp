#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace afsp {

struct DemoPair {
  std::string id;
  std::string src_text;
  std::string tgt_text;
  std::string src_lang;
  std::string tgt_lang;

  bool operator==(const DemoPair&) const = default;
};

// An immutable, validated list of parallel sentence pairs sharing one
// language direction.
class Corpus {
 public:
  // Throws MalformedRecord, DuplicateId, MixedLanguagePair or EmptyFile.
  explicit Corpus(std::vector<DemoPair> pairs);

  const std::vector<DemoPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  const DemoPair& operator[](std::size_t i) const { return pairs_[i]; }
  const std::string& src_lang() const noexcept { return pairs_.front().src_lang; }
  const std::string& tgt_lang() const noexcept { return pairs_.front().tgt_lang; }
  const DemoPair* find(std::string_view id) const;

  bool operator==(const Corpus& other) const { return pairs_ == other.pairs_; }

 private:
  std::vector<DemoPair> pairs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

enum class CorpusFormat { kJsonl, kTsv };

CorpusFormat parse_corpus_format(std::string_view name);

// JSONL: one {"id","src","tgt","src_lang","tgt_lang"} object per line.
// TSV: id, src, tgt, src_lang, tgt_lang or src, tgt, src_lang, tgt_lang.
// Missing ids become 1-based zero-padded record numbers. Blank lines are
// skipped.
Corpus parse_corpus(std::string_view content, CorpusFormat format);
Corpus ingest(const std::filesystem::path& path, CorpusFormat format);

struct CorpusSplit {
  Corpus demo;
  Corpus test;
};

// Seeded uniform sampling of test_size pairs without replacement. Both sides
// keep the input order.
CorpusSplit split(const Corpus& corpus, std::size_t test_size, std::uint64_t seed);

// Binary layout: "AFSPCOR1", u32 count, then per pair the five fields
// (id, src, tgt, src_lang, tgt_lang) as u32-length-prefixed UTF-8.
std::string serialize_corpus(const Corpus& corpus);
Corpus deserialize_corpus(std::string_view bytes);
void save(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

std::string to_jsonl(const Corpus& corpus);

}  // namespace afsp
