#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afsp/corpus.hpp"
#include "afsp/embedding.hpp"

namespace afsp {

// Seeded toy zh->en parallel data: a random lexicon of CJK words paired with
// pronounceable invented English words, composed into simple clauses.
struct SyntheticOptions {
  std::size_t pairs = 1000;
  std::uint64_t seed = 0;
  std::size_t nouns = 240;
  std::size_t verbs = 80;
  std::size_t adjectives = 80;
  std::string src_lang = "zh";
  std::string tgt_lang = "en";
};

Corpus synthetic_corpus(const SyntheticOptions& options);

// Sorted, de-duplicated tokens of every source and target text.
std::vector<std::string> corpus_vocabulary(const Corpus& corpus, const Tokenizer& tokenizer = default_tokenizer());

EmbeddingTable synthetic_table(const Corpus& corpus, std::size_t dim, std::uint64_t seed, std::uint64_t oov_seed);

}  // namespace afsp
