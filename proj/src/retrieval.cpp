#include "afsp/retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

constexpr std::string_view kIndexMagic = "AFSPIDX1";

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void write_matrix(BinaryWriter& w, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows));
  w.u32(static_cast<std::uint32_t>(m.cols));
  for (double x : m.data) w.f64(x);
}

Matrix read_matrix(BinaryReader& r) {
  const auto rows = r.u32();
  const auto cols = r.u32();
  if (static_cast<std::size_t>(rows) * cols * 8 > r.remaining()) {
    throw Error(ErrorCode::kVersionMismatch, "matrix payload exceeds file size");
  }
  Matrix m(rows, cols);
  for (double& x : m.data) x = r.f64();
  return m;
}

void min_max_normalize(std::vector<double>& xs) {
  if (xs.empty()) return;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& x : xs) x = range > 0.0 ? (x - min) / range : 0.0;
}

}  // namespace

void Weights::validate() const {
  for (double a : {dense, sparse, multi}) {
    if (!std::isfinite(a) || a < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "fusion weights must be finite and non-negative");
    }
  }
  if (dense == 0.0 && sparse == 0.0 && multi == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "at least one fusion weight must be positive");
  }
}

Weights parse_weights(std::string_view csv) {
  std::vector<double> values;
  std::stringstream ss{std::string(csv)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      auto trimmed = std::string(text::trim(item));
      values.push_back(std::stod(trimmed, &used));
      if (used != trimmed.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad weight '" + item + "'");
    }
  }
  if (values.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected three comma-separated weights, got '" + std::string(csv) + "'");
  }
  Weights w{values[0], values[1], values[2]};
  w.validate();
  return w;
}

double score_dense(const DenseVec& q, const DenseVec& p) {
  if (q.values.size() != p.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(q.values.size()) + " vs " + std::to_string(p.values.size()));
  }
  return dot(q.values, p.values);
}

double score_sparse(const SparseWeights& q, const SparseWeights& p) {
  double s = 0.0;
  auto a = q.weights.begin();
  auto b = p.weights.begin();
  while (a != q.weights.end() && b != p.weights.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

double score_multi(const MultiVec& q, const MultiVec& p) {
  if (q.rows.rows == 0 || p.rows.rows == 0) {
    throw Error(ErrorCode::kEmptyText, "late interaction needs at least one vector per side");
  }
  if (q.rows.cols != p.rows.cols) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(q.rows.cols) + " vs " + std::to_string(p.rows.cols));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < q.rows.rows; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p.rows.rows; ++j) {
      best = std::max(best, dot(q.rows.row(i), p.rows.row(j)));
    }
    total += best;
  }
  return total / static_cast<double>(q.rows.rows);
}

double score_hybrid(double s_dense, double s_sparse, double s_multi, const Weights& w) {
  return w.dense * s_dense + w.sparse * s_sparse + w.multi * s_multi;
}

RetrievalIndex::RetrievalIndex(Digest fingerprint, std::vector<IndexEntry> entries)
    : fingerprint_(fingerprint), entries_(std::move(entries)) {}

std::string RetrievalIndex::serialize() const {
  BinaryWriter w;
  w.magic(kIndexMagic);
  w.raw(fingerprint_);
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    w.str(e.pair.id);
    w.str(e.pair.src_text);
    w.str(e.pair.tgt_text);
    w.str(e.pair.src_lang);
    w.str(e.pair.tgt_lang);
    w.u32(static_cast<std::uint32_t>(e.repr.dense.values.size()));
    for (double x : e.repr.dense.values) w.f64(x);
    w.u32(static_cast<std::uint32_t>(e.repr.sparse.weights.size()));
    for (const auto& [id, weight] : e.repr.sparse.weights) {
      w.u32(id);
      w.f64(weight);
    }
    write_matrix(w, e.repr.multi.rows);
  }
  return w.buffer();
}

RetrievalIndex RetrievalIndex::deserialize(std::string_view bytes) {
  BinaryReader r(bytes, ErrorCode::kVersionMismatch);
  r.expect_magic(kIndexMagic);
  Digest fp{};
  r.raw(fp);
  const auto n = r.u32();
  std::vector<IndexEntry> entries;
  entries.reserve(std::min<std::size_t>(n, r.remaining() / 32));
  for (std::uint32_t i = 0; i < n; ++i) {
    IndexEntry e;
    e.pair.id = r.str();
    e.pair.src_text = r.str();
    e.pair.tgt_text = r.str();
    e.pair.src_lang = r.str();
    e.pair.tgt_lang = r.str();
    const auto h = r.u32();
    if (static_cast<std::size_t>(h) * 8 > r.remaining()) {
      throw Error(ErrorCode::kVersionMismatch, "dense vector exceeds file size");
    }
    e.repr.dense.values.resize(h);
    for (double& x : e.repr.dense.values) x = r.f64();
    const auto nz = r.u32();
    if (static_cast<std::size_t>(nz) * 12 > r.remaining()) {
      throw Error(ErrorCode::kVersionMismatch, "sparse weights exceed file size");
    }
    e.repr.sparse.weights.resize(nz);
    for (auto& [id, weight] : e.repr.sparse.weights) {
      id = r.u32();
      weight = r.f64();
    }
    e.repr.multi.rows = read_matrix(r);
    entries.push_back(std::move(e));
  }
  if (!r.at_end()) {
    throw Error(ErrorCode::kVersionMismatch, "trailing bytes after index");
  }
  return RetrievalIndex(fp, std::move(entries));
}

void RetrievalIndex::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

RetrievalIndex build_index(const Corpus& corpus, const EmbeddingTable& table, const ProjectionSet& proj,
                           unsigned workers) {
  if (proj.dim != table.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "projection dim " + std::to_string(proj.dim) + " vs table dim " +
                                                   std::to_string(table.dim()));
  }
  const std::size_t n = corpus.size();
  std::vector<IndexEntry> entries(n);
  std::vector<std::optional<Error>> failures(n);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      entries[i].pair = corpus[i];
      try {
        entries[i].repr = represent(table, proj, corpus[i].src_text);
      } catch (const Error& e) {
        failures[i] = e;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      throw Error(failures[i]->code(), "pair '" + corpus[i].id + "': " + failures[i]->detail());
    }
  }
  return RetrievalIndex(model_fingerprint(table, proj), std::move(entries));
}

Retriever::Retriever(const RetrievalIndex& index, const EmbeddingTable& table, const ProjectionSet& proj)
    : index_(index), table_(table), proj_(proj) {
  const auto fp = model_fingerprint(table, proj);
  if (fp != index.fingerprint()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "index built with " + to_hex(index.fingerprint()) + ", query model is " + to_hex(fp));
  }
}

std::vector<ScoredDemo> Retriever::topk(std::string_view query, const RetrievalOptions& options) const {
  if (text::is_blank(query)) {
    throw Error(ErrorCode::kEmptyQuery, "query is empty");
  }
  Representations q;
  try {
    q = represent(table_, proj_, query);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyText) throw Error(ErrorCode::kEmptyQuery, e.detail());
    throw;
  }
  return topk(q, options);
}

std::vector<ScoredDemo> Retriever::topk(const Representations& query, const RetrievalOptions& options) const {
  if (options.k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  }
  options.weights.validate();
  const auto& entries = index_.entries();
  const std::size_t n = entries.size();
  std::vector<double> dense(n), sparse(n), multi(n);
  for (std::size_t i = 0; i < n; ++i) {
    dense[i] = score_dense(query.dense, entries[i].repr.dense);
    sparse[i] = score_sparse(query.sparse, entries[i].repr.sparse);
    multi[i] = score_multi(query.multi, entries[i].repr.multi);
  }
  if (options.normalize_scores) {
    min_max_normalize(dense);
    min_max_normalize(sparse);
    min_max_normalize(multi);
  }
  std::vector<double> rank(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    rank[i] = score_hybrid(dense[i], sparse[i], multi[i], options.weights);
    order[i] = i;
  }
  const std::size_t k = std::min(options.k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return rank[a] != rank[b] ? rank[a] > rank[b] : a < b; });
  std::vector<ScoredDemo> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto i = order[r];
    out.push_back({entries[i].pair, i, dense[i], sparse[i], multi[i], rank[i]});
  }
  return out;
}

std::vector<ScoredDemo> retrieve_topk(std::string_view query, const RetrievalIndex& index,
                                      const EmbeddingTable& table, const ProjectionSet& proj, const Weights& w,
                                      std::size_t k, bool normalize_scores) {
  return Retriever(index, table, proj).topk(query, RetrievalOptions{w, k, normalize_scores});
}

}  // namespace afsp
