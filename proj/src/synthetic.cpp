#include "afsp/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "afsp/error.hpp"
#include "afsp/hashing.hpp"
#include "afsp/rng.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

struct Entry {
  std::string zh;
  std::string en;
};

constexpr std::array<std::string_view, 16> kOnsets{"b", "d", "f", "g", "k", "l", "m", "n",
                                                   "p", "r", "s", "t", "v", "z", "br", "st"};
constexpr std::array<std::string_view, 6> kVowels{"a", "e", "i", "o", "u", "ai"};
constexpr std::array<std::string_view, 6> kCodas{"", "", "n", "r", "s", "l"};

// CJK Unified Ideographs block, minus a margin at each end.
constexpr char32_t kCjkFirst = 0x4E10;
constexpr char32_t kCjkLast = 0x9F00;

class LexiconBuilder {
 public:
  explicit LexiconBuilder(Rng& rng) : rng_(rng) {}

  std::vector<Entry> make(std::size_t count, std::size_t min_syllables, std::size_t max_syllables) {
    std::vector<Entry> out;
    out.reserve(count);
    while (out.size() < count) {
      std::string en;
      const auto syllables = static_cast<std::size_t>(rng_.uniform_int(
          static_cast<std::int64_t>(min_syllables), static_cast<std::int64_t>(max_syllables)));
      for (std::size_t s = 0; s < syllables; ++s) {
        en += kOnsets[rng_.uniform_index(kOnsets.size())];
        en += kVowels[rng_.uniform_index(kVowels.size())];
        en += kCodas[rng_.uniform_index(kCodas.size())];
      }
      if (!used_en_.insert(en).second) continue;

      std::string zh;
      const auto chars = 1 + rng_.uniform_index(2);
      for (std::size_t c = 0; c < chars; ++c) {
        char32_t cp = 0;
        do {
          cp = kCjkFirst + static_cast<char32_t>(rng_.uniform_index(kCjkLast - kCjkFirst));
        } while (!used_cjk_.insert(cp).second);
        text::append_utf8(zh, cp);
      }
      out.push_back({std::move(zh), std::move(en)});
    }
    return out;
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_en_;
  std::unordered_set<char32_t> used_cjk_;
};

const Entry& pick(const std::vector<Entry>& list, Rng& rng) { return list[rng.uniform_index(list.size())]; }

struct Phrase {
  std::string zh;
  std::string en;
};

// "[adj] noun [of the noun]" / "[adj的][noun的]noun"
Phrase noun_phrase(const std::vector<Entry>& nouns, const std::vector<Entry>& adjs, Rng& rng) {
  Phrase p;
  const Entry& head = pick(nouns, rng);
  std::string adj_en, adj_zh, of_en, of_zh;
  if (rng.bernoulli(0.5)) {
    const Entry& a = pick(adjs, rng);
    adj_en = a.en + " ";
    adj_zh = a.zh + "的";
  }
  if (rng.bernoulli(0.3)) {
    const Entry& o = pick(nouns, rng);
    of_en = " of the " + o.en;
    of_zh = o.zh + "的";
  }
  p.en = "the " + adj_en + head.en + of_en;
  p.zh = of_zh + adj_zh + head.zh;
  return p;
}

}  // namespace

Corpus synthetic_corpus(const SyntheticOptions& options) {
  if (options.pairs == 0 || options.nouns < 2 || options.verbs == 0 || options.adjectives == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus needs pairs >= 1 and a non-trivial lexicon");
  }
  Rng rng(derive_seed(options.seed, "synthetic-corpus"));
  LexiconBuilder builder(rng);
  const auto nouns = builder.make(options.nouns, 2, 3);
  const auto verbs = builder.make(options.verbs, 1, 2);
  const auto adjs = builder.make(options.adjectives, 2, 3);

  const int width = std::max<int>(4, static_cast<int>(std::to_string(options.pairs).size()));
  std::vector<DemoPair> pairs;
  pairs.reserve(options.pairs);
  std::set<std::string> seen;
  while (pairs.size() < options.pairs) {
    const Phrase subj = noun_phrase(nouns, adjs, rng);
    const Entry& verb = pick(verbs, rng);
    const Phrase obj = noun_phrase(nouns, adjs, rng);
    std::string en = subj.en + " " + verb.en + "s " + obj.en;
    std::string zh = subj.zh + verb.zh + obj.zh;
    if (rng.bernoulli(0.35)) {
      const Entry& place = pick(nouns, rng);
      en += " in the " + place.en;
      zh = "在" + place.zh + "里" + zh;
    }
    if (rng.bernoulli(0.25)) {
      const Phrase extra = noun_phrase(nouns, adjs, rng);
      const Entry& v2 = pick(verbs, rng);
      en += " and " + v2.en + "s " + extra.en;
      zh += "并" + v2.zh + extra.zh;
    }
    en[0] = static_cast<char>(en[0] - 'a' + 'A');
    en += ".";
    zh += "。";
    if (!seen.insert(en).second) continue;

    char id[32];
    std::snprintf(id, sizeof id, "syn%0*zu", width, pairs.size() + 1);
    pairs.push_back({id, std::move(zh), std::move(en), options.src_lang, options.tgt_lang});
  }
  return Corpus(std::move(pairs));
}

std::vector<std::string> corpus_vocabulary(const Corpus& corpus, const Tokenizer& tokenizer) {
  std::set<std::string> vocab;
  for (const auto& p : corpus.pairs()) {
    for (auto& t : tokenizer.segment(p.src_text)) vocab.insert(std::move(t));
    for (auto& t : tokenizer.segment(p.tgt_text)) vocab.insert(std::move(t));
  }
  return {vocab.begin(), vocab.end()};
}

EmbeddingTable synthetic_table(const Corpus& corpus, std::size_t dim, std::uint64_t seed, std::uint64_t oov_seed) {
  return EmbeddingTable::synthetic(corpus_vocabulary(corpus), dim, seed, oov_seed);
}

}  // namespace afsp
