#include "afsp/degeneration.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"
#include "afsp/hashing.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

using text::Lexed;
using text::Piece;
using text::PieceKind;

constexpr double kSpellingRate = 0.1;
constexpr double kReplaceFraction = 0.15;
constexpr double kInsertSpanFraction = 0.3;
constexpr std::size_t kMaxRepeatSpan = 5;
constexpr double kFunctionWordDrop = 0.15;
constexpr std::size_t kShuffleWindow = 3;

bool is_content(const Piece& p) { return p.kind != PieceKind::kPunct; }

std::vector<std::size_t> content_positions(const Lexed& lexed) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lexed.pieces.size(); ++i) {
    if (is_content(lexed.pieces[i])) out.push_back(i);
  }
  return out;
}

void erase_piece(Lexed& lexed, std::size_t i) {
  const bool first = i == 0;
  lexed.pieces.erase(lexed.pieces.begin() + static_cast<std::ptrdiff_t>(i));
  if (first && !lexed.pieces.empty()) lexed.pieces.front().lead.clear();
}

bool is_function_word(std::string_view token) {
  static const std::unordered_set<std::string_view> kWords{
      "a",  "an",  "the", "of",  "to",   "in",   "on",   "at",   "for", "and", "or",  "but",
      "is", "are", "was", "were", "be",  "by",   "with", "as",   "that", "this", "it", "from",
      "的", "了",  "是",  "在",  "和",   "也",   "就",   "都",   "而",  "及",  "与",
  };
  return kWords.contains(token);
}

std::string capitalize_like(const std::string& original, std::string replacement) {
  if (!original.empty() && !replacement.empty() && original[0] >= 'A' && original[0] <= 'Z' &&
      replacement[0] >= 'a' && replacement[0] <= 'z') {
    replacement[0] = static_cast<char>(replacement[0] - 32);
  }
  return replacement;
}

}  // namespace

std::string_view op_name(DegenerationOp op) {
  switch (op) {
    case DegenerationOp::kParallel: return "Parallel";
    case DegenerationOp::kBack: return "Back";
    case DegenerationOp::kReplace: return "Replace";
    case DegenerationOp::kInsert: return "Insert";
    case DegenerationOp::kRet: return "Ret";
    case DegenerationOp::kSe: return "Se";
  }
  return "?";
}

DegenerationOp parse_op(std::string_view name) {
  for (auto op : kCanonicalOpOrder) {
    if (op_name(op) == name) return op;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown degeneration operation '" + std::string(name) + "'");
}

OpCombination::OpCombination(std::uint8_t mask) : mask_(mask) {
  if (mask >= (1u << kCanonicalOpOrder.size())) {
    throw Error(ErrorCode::kInvalidArgument, "operation mask out of range");
  }
}

OpCombination OpCombination::of(std::initializer_list<DegenerationOp> ops) {
  std::uint8_t mask = 0;
  for (auto op : ops) mask |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(op));
  return OpCombination(mask);
}

std::size_t OpCombination::size() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }

bool OpCombination::contains(DegenerationOp op) const noexcept {
  return (mask_ >> static_cast<unsigned>(op)) & 1u;
}

std::vector<DegenerationOp> OpCombination::ops() const {
  std::vector<DegenerationOp> out;
  for (auto op : kCanonicalOpOrder) {
    if (contains(op)) out.push_back(op);
  }
  return out;
}

std::vector<std::string> OpCombination::names() const {
  std::vector<std::string> out;
  for (auto op : ops()) out.emplace_back(op_name(op));
  return out;
}

std::vector<OpCombination> enumerate_combinations(int max_size) {
  if (max_size < 0 || max_size > static_cast<int>(kCanonicalOpOrder.size())) {
    throw Error(ErrorCode::kInvalidArgument, "max combination size must be in [0, 6]");
  }
  constexpr unsigned kOps = kCanonicalOpOrder.size();
  std::vector<OpCombination> out;
  for (int size = 0; size <= max_size; ++size) {
    // Each subset as its ascending list of canonical positions, sorted.
    std::vector<std::vector<unsigned>> subsets;
    for (unsigned mask = 0; mask < (1u << kOps); ++mask) {
      if (std::popcount(mask) != size) continue;
      std::vector<unsigned> positions;
      for (unsigned b = 0; b < kOps; ++b) {
        if ((mask >> b) & 1u) positions.push_back(b);
      }
      subsets.push_back(std::move(positions));
    }
    std::sort(subsets.begin(), subsets.end());
    for (const auto& positions : subsets) {
      std::uint8_t mask = 0;
      for (auto b : positions) mask |= static_cast<std::uint8_t>(1u << b);
      out.emplace_back(mask);
    }
  }
  return out;
}

double score_of(const OpCombination& combo) {
  // (5 - |b|) / 5 is 1 - 0.2|b| without the rounding of 0.2 * |b|.
  const double raw = (5.0 - static_cast<double>(combo.size())) / 5.0;
  return std::max(0.0, raw);
}

std::string MockTranslator::translate(std::string_view input, std::string_view from_lang, std::string_view to_lang,
                                      std::uint64_t variant) const {
  const std::string direction = std::string(from_lang) + ">" + std::string(to_lang);
  Rng rng(derive_seed(derive_seed(derive_seed(seed_, input), direction), variant));
  Lexed lexed = text::lex(input);
  auto content = content_positions(lexed);
  for (std::size_t start = 0; start < content.size(); start += kShuffleWindow) {
    const std::size_t end = std::min(content.size(), start + kShuffleWindow);
    for (std::size_t i = end - 1; i > start; --i) {
      const std::size_t j = start + rng.uniform_index(i - start + 1);
      std::swap(lexed.pieces[content[i]].text, lexed.pieces[content[j]].text);
      std::swap(lexed.pieces[content[i]].kind, lexed.pieces[content[j]].kind);
    }
  }
  for (std::size_t i = lexed.pieces.size(); i-- > 0;) {
    const auto& p = lexed.pieces[i];
    if (lexed.pieces.size() > 1 && is_content(p) && is_function_word(text::to_lower(p.text)) &&
        rng.bernoulli(kFunctionWordDrop)) {
      erase_piece(lexed, i);
    }
  }
  return text::render(lexed);
}

SynonymTable SynonymTable::parse(std::string_view tsv) {
  SynonymTable table;
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    auto nl = tsv.find('\n', pos);
    auto line = tsv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? tsv.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      auto col = text::trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (!col.empty()) cols.emplace_back(col);
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 2) continue;
    auto key = text::to_lower(cols.front());
    auto& syns = table.entries_[key];
    syns.insert(syns.end(), cols.begin() + 1, cols.end());
  }
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const std::vector<std::string>* SynonymTable::find(std::string_view token) const {
  auto it = entries_.find(text::to_lower(token));
  return it == entries_.end() ? nullptr : &it->second;
}

NeighborFinder::NeighborFinder(const EmbeddingTable& table) : table_(table) {
  norms_.resize(table.vocab_size());
  cjk_.resize(table.vocab_size());
  for (TokenId i = 0; i < table.vocab_size(); ++i) {
    double s = 0.0;
    for (float x : table.row(i)) s += static_cast<double>(x) * x;
    norms_[i] = std::sqrt(s);
    cjk_[i] = text::cjk_fraction(table.vocab()[i]) > 0.5;
  }
}

std::optional<std::string> NeighborFinder::nearest(std::string_view token) const {
  auto id = table_.find(text::to_lower(token));
  if (!id) return std::nullopt;
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(*id); it != cache_.end()) {
      return it->second ? std::optional<std::string>(table_.vocab()[*it->second]) : std::nullopt;
    }
  }
  std::optional<TokenId> best;
  double best_cos = -2.0;
  auto query = table_.row(*id);
  if (norms_[*id] > 0.0) {
    for (TokenId j = 0; j < table_.vocab_size(); ++j) {
      if (j == *id || cjk_[j] != cjk_[*id] || norms_[j] == 0.0) continue;
      auto row = table_.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) s += static_cast<double>(query[k]) * row[k];
      const double cos = s / (norms_[*id] * norms_[j]);
      if (cos > best_cos) {
        best_cos = cos;
        best = j;
      }
    }
  }
  std::lock_guard lock(mutex_);
  cache_.emplace(*id, best);
  return best ? std::optional<std::string>(table_.vocab()[*best]) : std::nullopt;
}

Degenerator::Degenerator(DegenerationResources resources) : resources_(resources) {
  if (resources_.table != nullptr) {
    neighbors_ = std::make_unique<NeighborFinder>(*resources_.table);
  }
}

std::string Degenerator::apply_op(DegenerationOp op, const DemoPair& pair, std::string_view current_text,
                                  Rng& rng) const {
  if (text::is_blank(current_text)) {
    throw Error(ErrorCode::kEmptyText, "cannot degenerate an empty text");
  }
  for (int attempt_no = 0; attempt_no <= kMaxPerturbationRetries; ++attempt_no) {
    auto out = attempt(op, pair, current_text, rng);
    if (out != current_text && !text::is_blank(out)) {
      return out;
    }
  }
  throw Error(ErrorCode::kNoOpPerturbation, std::string(op_name(op)) + " left pair '" + pair.id + "' unchanged");
}

std::string Degenerator::apply(const OpCombination& combo, const DemoPair& pair, Rng& rng) const {
  std::string current = pair.tgt_text;
  for (auto op : combo.ops()) {
    current = apply_op(op, pair, current, rng);
  }
  return current;
}

std::string Degenerator::replace_tokens(std::string_view current, Rng& rng) const {
  if (resources_.synonyms == nullptr && !neighbors_) {
    throw Error(ErrorCode::kMissingReplacementSource, "Replace needs a synonym table or an embedding table");
  }
  Lexed lexed = text::lex(current);
  const auto content = content_positions(lexed);
  std::vector<std::pair<std::size_t, std::vector<std::string>>> options;
  for (auto pos : content) {
    const auto& tok = lexed.pieces[pos].text;
    std::vector<std::string> choices;
    if (resources_.synonyms != nullptr) {
      if (const auto* syns = resources_.synonyms->find(tok)) choices = *syns;
    }
    if (choices.empty() && neighbors_) {
      if (auto nn = neighbors_->nearest(tok)) choices.push_back(*nn);
    }
    if (!choices.empty()) options.emplace_back(pos, std::move(choices));
  }
  if (options.empty()) return std::string(current);
  const auto wanted = static_cast<std::size_t>(std::llround(kReplaceFraction * static_cast<double>(content.size())));
  const std::size_t count = std::min(options.size(), std::max<std::size_t>(1, wanted));
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + rng.uniform_index(options.size() - i);
    std::swap(options[i], options[j]);
    auto& [pos, choices] = options[i];
    auto& piece = lexed.pieces[pos];
    piece.text = capitalize_like(piece.text, choices[rng.uniform_index(choices.size())]);
  }
  return text::render(lexed);
}

std::string Degenerator::attempt(DegenerationOp op, const DemoPair& pair, std::string_view current, Rng& rng) const {
  switch (op) {
    case DegenerationOp::kParallel:
      return pair.src_text;

    case DegenerationOp::kBack: {
      if (resources_.translator == nullptr) {
        throw Error(ErrorCode::kMissingTranslator, "Back requires a translator");
      }
      const auto v1 = rng.next_u64();
      const auto v2 = rng.next_u64();
      const auto pivot = resources_.translator->translate(current, pair.tgt_lang, pair.src_lang, v1);
      return resources_.translator->translate(pivot, pair.src_lang, pair.tgt_lang, v2);
    }

    case DegenerationOp::kReplace:
      return replace_tokens(current, rng);

    case DegenerationOp::kInsert: {
      const Lexed src = text::lex(pair.src_text);
      std::vector<Piece> src_content;
      for (const auto& p : src.pieces) {
        if (is_content(p)) src_content.push_back(p);
      }
      if (src_content.empty()) return std::string(current);
      const auto max_len = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(kInsertSpanFraction * static_cast<double>(src_content.size()))));
      const auto len = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_len)));
      const auto start = rng.uniform_index(src_content.size() - len + 1);
      Lexed tgt = text::lex(current);
      const auto boundary = rng.uniform_index(tgt.pieces.size() + 1);
      std::vector<Piece> span(src_content.begin() + static_cast<std::ptrdiff_t>(start),
                              src_content.begin() + static_cast<std::ptrdiff_t>(start + len));
      span.front().lead = text::spacing_before(boundary == 0 ? nullptr : &tgt.pieces[boundary - 1], span.front());
      if (boundary < tgt.pieces.size() && tgt.pieces[boundary].lead.empty()) {
        tgt.pieces[boundary].lead = text::spacing_before(&span.back(), tgt.pieces[boundary]);
      }
      tgt.pieces.insert(tgt.pieces.begin() + static_cast<std::ptrdiff_t>(boundary), span.begin(), span.end());
      return text::render(tgt);
    }

    case DegenerationOp::kRet: {
      Lexed tgt = text::lex(current);
      if (tgt.pieces.empty()) return std::string(current);
      const auto max_len = std::min(kMaxRepeatSpan, tgt.pieces.size());
      const auto len = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_len)));
      const auto start = rng.uniform_index(tgt.pieces.size() - len + 1);
      std::vector<Piece> copy(tgt.pieces.begin() + static_cast<std::ptrdiff_t>(start),
                              tgt.pieces.begin() + static_cast<std::ptrdiff_t>(start + len));
      copy.front().lead = text::spacing_before(&copy.back(), copy.front());
      tgt.pieces.insert(tgt.pieces.begin() + static_cast<std::ptrdiff_t>(start + len), copy.begin(), copy.end());
      return text::render(tgt);
    }

    case DegenerationOp::kSe: {
      Lexed tgt = text::lex(current);
      const auto content = content_positions(tgt);
      if (content.empty()) return std::string(current);
      std::vector<std::size_t> chosen;
      for (auto pos : content) {
        if (rng.bernoulli(kSpellingRate)) chosen.push_back(pos);
      }
      if (chosen.empty()) chosen.push_back(content[rng.uniform_index(content.size())]);
      // Back to front so erasing a piece keeps earlier positions valid.
      for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) {
        const auto pos = *it;
        auto& piece = tgt.pieces[pos];
        std::u32string cps = text::decode_utf8(piece.text);
        enum Edit { kSwap, kDelete, kDuplicate };
        std::vector<Edit> edits;
        const bool can_swap_next = piece.kind == PieceKind::kCjk && pos + 1 < tgt.pieces.size() &&
                                   tgt.pieces[pos + 1].kind == PieceKind::kCjk;
        if (cps.size() >= 2 || can_swap_next) edits.push_back(kSwap);
        if (cps.size() >= 2 || tgt.pieces.size() > 1) edits.push_back(kDelete);
        edits.push_back(kDuplicate);
        const Edit edit = edits[rng.uniform_index(edits.size())];
        if (edit == kSwap && cps.size() < 2) {
          std::swap(piece.text, tgt.pieces[pos + 1].text);
        } else if (edit == kSwap) {
          const auto at = rng.uniform_index(cps.size() - 1);
          std::swap(cps[at], cps[at + 1]);
          piece.text = text::encode_utf8(cps);
        } else if (edit == kDelete && cps.size() < 2) {
          erase_piece(tgt, pos);
        } else if (edit == kDelete) {
          cps.erase(rng.uniform_index(cps.size()), 1);
          piece.text = text::encode_utf8(cps);
        } else {
          const auto at = rng.uniform_index(cps.size());
          cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(at), cps[at]);
          piece.text = text::encode_utf8(cps);
        }
      }
      return text::render(tgt);
    }
  }
  return std::string(current);
}

std::uint64_t combination_seed(std::uint64_t seed, std::string_view pair_id, const OpCombination& combo) {
  return derive_seed(derive_seed(seed, pair_id), combo.mask());
}

DegenerationDataset generate_dataset(const Corpus& corpus, int max_size, std::uint64_t seed,
                                     const DegenerationResources& resources, unsigned workers) {
  const auto combos = enumerate_combinations(max_size);
  const Degenerator degenerator(resources);
  const std::size_t n = corpus.size();
  std::vector<DegenerationDataset> per_pair(n);
  std::vector<std::optional<Error>> failures(n);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& pair = corpus[i];
      auto& out = per_pair[i];
      try {
        for (const auto& combo : combos) {
          Rng rng(combination_seed(seed, pair.id, combo));
          try {
            auto degraded = degenerator.apply(combo, pair, rng);
            if (!combo.empty() && degraded == pair.tgt_text) {
              out.skipped.push_back({pair.id, combo, "combined operations restored the original text"});
              continue;
            }
            out.examples.push_back({std::move(degraded), score_of(combo), pair.id, combo});
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kNoOpPerturbation) throw;
            out.skipped.push_back({pair.id, combo, e.detail()});
          }
        }
      } catch (const Error& e) {
        failures[i] = e;
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  DegenerationDataset dataset;
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) throw Error(failures[i]->code(), "pair '" + corpus[i].id + "': " + failures[i]->detail());
    auto& part = per_pair[i];
    std::move(part.examples.begin(), part.examples.end(), std::back_inserter(dataset.examples));
    std::move(part.skipped.begin(), part.skipped.end(), std::back_inserter(dataset.skipped));
  }
  return dataset;
}

std::string to_jsonl(const std::vector<RerankerExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    nlohmann::ordered_json obj;
    obj["text"] = ex.text;
    obj["score"] = ex.score;
    obj["pair_id"] = ex.pair_id;
    obj["ops"] = ex.ops.names();
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<RerankerExample> parse_examples_jsonl(std::string_view content) {
  std::vector<RerankerExample> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      RerankerExample ex;
      ex.text = obj.at("text").get<std::string>();
      ex.score = obj.at("score").get<double>();
      ex.pair_id = obj.value("pair_id", std::string());
      if (obj.contains("ops")) {
        std::uint8_t mask = 0;
        for (const auto& name : obj.at("ops")) {
          mask |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(parse_op(name.get<std::string>())));
        }
        ex.ops = OpCombination(mask);
      }
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace afsp
