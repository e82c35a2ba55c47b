#include "afsp/corpus.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"
#include "afsp/rng.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

constexpr std::string_view kCorpusMagic = "AFSPCOR1";

std::string malformed_at(std::size_t line, const std::string& why) {
  return "line " + std::to_string(line) + ": " + why;
}

std::string validate_pair(const DemoPair& p) {
  for (const auto* field : {&p.id, &p.src_text, &p.tgt_text, &p.src_lang, &p.tgt_lang}) {
    if (!text::valid_utf8(*field)) return "invalid UTF-8";
  }
  if (p.id.empty()) return "empty id";
  if (text::is_blank(p.src_text)) return "empty source text";
  if (text::is_blank(p.tgt_text)) return "empty target text";
  if (p.src_lang.empty() || p.tgt_lang.empty()) return "missing language code";
  if (p.src_lang == p.tgt_lang) return "source and target language are both '" + p.src_lang + "'";
  return {};
}

std::string padded_id(std::size_t n, std::size_t width) {
  std::string digits = std::to_string(n);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string json_string_field(const nlohmann::json& obj, const char* key, std::size_t line, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw Error(ErrorCode::kMalformedRecord, malformed_at(line, std::string("missing key '") + key + "'"));
    return {};
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedRecord, malformed_at(line, std::string("key '") + key + "' is not a string"));
  }
  return it->get<std::string>();
}

}  // namespace

Corpus::Corpus(std::vector<DemoPair> pairs) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) {
    throw Error(ErrorCode::kEmptyFile, "corpus has no pairs");
  }
  by_id_.reserve(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (auto why = validate_pair(p); !why.empty()) {
      throw Error(ErrorCode::kMalformedRecord, "pair " + std::to_string(i + 1) + ": " + why);
    }
    if (p.src_lang != pairs_.front().src_lang || p.tgt_lang != pairs_.front().tgt_lang) {
      throw Error(ErrorCode::kMixedLanguagePair, "pair '" + p.id + "' is " + p.src_lang + "->" + p.tgt_lang +
                                                     ", corpus is " + pairs_.front().src_lang + "->" +
                                                     pairs_.front().tgt_lang);
    }
    if (!by_id_.emplace(p.id, i).second) {
      throw Error(ErrorCode::kDuplicateId, p.id);
    }
  }
}

const DemoPair* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &pairs_[it->second];
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "tsv") return CorpusFormat::kTsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown corpus format '" + std::string(name) + "'");
}

Corpus parse_corpus(std::string_view content, CorpusFormat format) {
  std::vector<DemoPair> pairs;
  std::vector<std::size_t> needs_id;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;

    DemoPair p;
    if (format == CorpusFormat::kJsonl) {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, e.what()));
      }
      if (!obj.is_object()) {
        throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "record is not a JSON object"));
      }
      p.id = json_string_field(obj, "id", line_no, false);
      p.src_text = json_string_field(obj, "src", line_no, true);
      p.tgt_text = json_string_field(obj, "tgt", line_no, true);
      p.src_lang = json_string_field(obj, "src_lang", line_no, true);
      p.tgt_lang = json_string_field(obj, "tgt_lang", line_no, true);
    } else {
      auto cols = split_tabs(line);
      if (cols.size() == 5) {
        p.id = cols[0];
        cols.erase(cols.begin());
      } else if (cols.size() != 4) {
        throw Error(ErrorCode::kMalformedRecord,
                    malformed_at(line_no, "expected 4 or 5 tab-separated columns, got " + std::to_string(cols.size())));
      }
      p.src_text = cols[0];
      p.tgt_text = cols[1];
      p.src_lang = cols[2];
      p.tgt_lang = cols[3];
    }
    if (p.id.empty()) needs_id.push_back(pairs.size());
    if (auto why = validate_pair(DemoPair{p.id.empty() ? "-" : p.id, p.src_text, p.tgt_text, p.src_lang, p.tgt_lang});
        !why.empty()) {
      throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, why));
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyFile, "no records");
  }
  const std::size_t width = std::max<std::size_t>(4, std::to_string(pairs.size()).size());
  for (auto i : needs_id) pairs[i].id = padded_id(i + 1, width);
  return Corpus(std::move(pairs));
}

Corpus ingest(const std::filesystem::path& path, CorpusFormat format) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIoFailure, "no such file: " + path.string());
  }
  return parse_corpus(read_file(path), format);
}

CorpusSplit split(const Corpus& corpus, std::size_t test_size, std::uint64_t seed) {
  if (test_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "test_size must be >= 1");
  }
  if (test_size >= corpus.size()) {
    throw Error(ErrorCode::kTestSizeTooLarge, "test_size " + std::to_string(test_size) + " >= corpus size " +
                                                  std::to_string(corpus.size()));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first test_size slots are the sample.
  for (std::size_t i = 0; i < test_size; ++i) {
    const auto j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<bool> in_test(corpus.size(), false);
  for (std::size_t i = 0; i < test_size; ++i) in_test[order[i]] = true;

  std::vector<DemoPair> demo;
  std::vector<DemoPair> test;
  demo.reserve(corpus.size() - test_size);
  test.reserve(test_size);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_test[i] ? test : demo).push_back(corpus[i]);
  }
  return {Corpus(std::move(demo)), Corpus(std::move(test))};
}

std::string serialize_corpus(const Corpus& corpus) {
  BinaryWriter w;
  w.magic(kCorpusMagic);
  w.u32(static_cast<std::uint32_t>(corpus.size()));
  for (const auto& p : corpus.pairs()) {
    w.str(p.id);
    w.str(p.src_text);
    w.str(p.tgt_text);
    w.str(p.src_lang);
    w.str(p.tgt_lang);
  }
  return w.buffer();
}

Corpus deserialize_corpus(std::string_view bytes) {
  BinaryReader r(bytes, ErrorCode::kMalformedRecord);
  r.expect_magic(kCorpusMagic);
  const auto n = r.u32();
  std::vector<DemoPair> pairs;
  pairs.reserve(std::min<std::size_t>(n, r.remaining() / 20));
  for (std::uint32_t i = 0; i < n; ++i) {
    DemoPair p;
    p.id = r.str();
    p.src_text = r.str();
    p.tgt_text = r.str();
    p.src_lang = r.str();
    p.tgt_lang = r.str();
    pairs.push_back(std::move(p));
  }
  if (!r.at_end()) {
    throw Error(ErrorCode::kMalformedRecord, std::to_string(r.remaining()) + " trailing bytes after corpus");
  }
  return Corpus(std::move(pairs));
}

void save(const Corpus& corpus, const std::filesystem::path& path) { write_file(path, serialize_corpus(corpus)); }

Corpus load_corpus(const std::filesystem::path& path) { return deserialize_corpus(read_file(path)); }

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.pairs()) {
    nlohmann::ordered_json obj;
    obj["id"] = p.id;
    obj["src"] = p.src_text;
    obj["tgt"] = p.tgt_text;
    obj["src_lang"] = p.src_lang;
    obj["tgt_lang"] = p.tgt_lang;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace afsp
