#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "afsp/corpus.hpp"
#include "afsp/embedding.hpp"
#include "afsp/rng.hpp"

namespace afsp {

// Declared in canonical application order: whole-sentence operations first,
// character-level last.
enum class DegenerationOp : std::uint8_t { kParallel, kBack, kReplace, kInsert, kRet, kSe };

inline constexpr std::array<DegenerationOp, 6> kCanonicalOpOrder{
    DegenerationOp::kParallel, DegenerationOp::kBack, DegenerationOp::kReplace,
    DegenerationOp::kInsert,   DegenerationOp::kRet,  DegenerationOp::kSe,
};

std::string_view op_name(DegenerationOp op);
DegenerationOp parse_op(std::string_view name);

// A subset of the six operations, stored as a bitmask over the canonical
// order.
class OpCombination {
 public:
  OpCombination() = default;
  explicit OpCombination(std::uint8_t mask);
  static OpCombination of(std::initializer_list<DegenerationOp> ops);

  std::uint8_t mask() const noexcept { return mask_; }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return mask_ == 0; }
  bool contains(DegenerationOp op) const noexcept;
  std::vector<DegenerationOp> ops() const;
  std::vector<std::string> names() const;

  bool operator==(const OpCombination&) const = default;

 private:
  std::uint8_t mask_ = 0;
};

// All subsets of size <= max_size (0..6), ordered by size, then
// lexicographically over the canonical order. The empty set comes first.
std::vector<OpCombination> enumerate_combinations(int max_size);

// max(0, 1 - 0.2 * |b|).
double score_of(const OpCombination& combo);

// Translation service used by the Back operation. `variant` lets callers ask
// for a different sample of the same input.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string translate(std::string_view text, std::string_view from_lang, std::string_view to_lang,
                                std::uint64_t variant) const = 0;
};

// Offline stand-in: shuffles content tokens within windows of 3 and drops
// function words with probability 0.15. Deterministic in (seed, input,
// direction, variant).
class MockTranslator final : public Translator {
 public:
  explicit MockTranslator(std::uint64_t seed) : seed_(seed) {}
  std::string translate(std::string_view text, std::string_view from_lang, std::string_view to_lang,
                        std::uint64_t variant) const override;

 private:
  std::uint64_t seed_;
};

// token<TAB>synonym[<TAB>synonym...] per line; tokens are matched lowercased.
class SynonymTable {
 public:
  static SynonymTable parse(std::string_view tsv);
  static SynonymTable load(const std::filesystem::path& path);

  const std::vector<std::string>* find(std::string_view token) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Nearest vocabulary neighbour by cosine over an embedding table, restricted
// to tokens of the same script class (CJK vs. non-CJK). Results are cached;
// safe for concurrent use.
class NeighborFinder {
 public:
  explicit NeighborFinder(const EmbeddingTable& table);
  std::optional<std::string> nearest(std::string_view token) const;

 private:
  const EmbeddingTable& table_;
  std::vector<double> norms_;
  std::vector<bool> cjk_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<TokenId, std::optional<TokenId>> cache_;
};

struct DegenerationResources {
  const Translator* translator = nullptr;
  const EmbeddingTable* table = nullptr;
  const SynonymTable* synonyms = nullptr;
};

inline constexpr int kMaxPerturbationRetries = 5;

class Degenerator {
 public:
  explicit Degenerator(DegenerationResources resources);

  // Applies one operation. The result always differs from current_text;
  // after 5 failed retries NoOpPerturbation is thrown.
  std::string apply_op(DegenerationOp op, const DemoPair& pair, std::string_view current_text, Rng& rng) const;

  // Applies the operations of `combo` to pair.tgt_text in canonical order.
  std::string apply(const OpCombination& combo, const DemoPair& pair, Rng& rng) const;

 private:
  std::string attempt(DegenerationOp op, const DemoPair& pair, std::string_view current, Rng& rng) const;
  std::string replace_tokens(std::string_view current, Rng& rng) const;

  DegenerationResources resources_;
  std::unique_ptr<NeighborFinder> neighbors_;
};

struct RerankerExample {
  std::string text;
  double score = 0.0;
  std::string pair_id;
  OpCombination ops;

  bool operator==(const RerankerExample&) const = default;
};

struct SkippedExample {
  std::string pair_id;
  OpCombination ops;
  std::string reason;
};

struct DegenerationDataset {
  std::vector<RerankerExample> examples;
  std::vector<SkippedExample> skipped;
};

// Random stream per (seed, pair id, combination), so output does not depend
// on worker scheduling. Combinations that cannot perturb the text are
// skipped and logged.
DegenerationDataset generate_dataset(const Corpus& corpus, int max_size, std::uint64_t seed,
                                     const DegenerationResources& resources, unsigned workers = 1);

std::uint64_t combination_seed(std::uint64_t seed, std::string_view pair_id, const OpCombination& combo);

// {"text":...,"score":...,"pair_id":...,"ops":[...]} per line.
std::string to_jsonl(const std::vector<RerankerExample>& examples);
std::vector<RerankerExample> parse_examples_jsonl(std::string_view content);

}  // namespace afsp
