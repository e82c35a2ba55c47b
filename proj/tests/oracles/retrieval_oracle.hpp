#pragma once

// Brute-force relevance scoring computed straight from table rows and
// projection matrices, sharing nothing with the library beyond the table and
// the word segmenter. Sparse weights are keyed by surface token.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "afsp/corpus.hpp"
#include "afsp/embedding.hpp"
#include "afsp/retrieval.hpp"
#include "afsp/text.hpp"

namespace oracle {

struct Repr {
  std::vector<double> dense;
  std::map<std::string, double> sparse;
  std::vector<std::vector<double>> multi;
};

inline void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Repr represent(const afsp::EmbeddingTable& table, const afsp::ProjectionSet& proj, const std::string& text) {
  const std::size_t h = table.dim();
  std::vector<std::string> tokens = afsp::text::segment_words(text);
  std::vector<std::vector<double>> rows;
  for (const auto& t : tokens) {
    if (auto id = table.find(t)) {
      auto r = table.row(*id);
      rows.emplace_back(r.begin(), r.end());
    } else {
      rows.push_back(table.oov_vector(t));
    }
  }
  Repr out;
  out.dense.assign(h, -INFINITY);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < h; ++j) out.dense[j] = std::max(out.dense[j], r[j]);
  }
  normalize(out.dense);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    double w = 0.0;
    for (std::size_t j = 0; j < h; ++j) w += proj.w_sparse[j] * rows[i][j];
    if (w <= 0.0) continue;
    auto it = out.sparse.find(tokens[i]);
    if (it == out.sparse.end()) {
      out.sparse[tokens[i]] = w;
    } else {
      it->second = std::max(it->second, w);
    }
  }

  for (const auto& r : rows) {
    std::vector<double> m(h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t k = 0; k < h; ++k) m[j] += proj.w_multi[k * h + j] * r[k];
    }
    normalize(m);
    out.multi.push_back(std::move(m));
  }
  return out;
}

struct Scores {
  double dense, sparse, multi;
};

inline Scores score(const Repr& q, const Repr& p) {
  Scores s{dot(q.dense, p.dense), 0.0, 0.0};
  for (const auto& [tok, w] : q.sparse) {
    auto it = p.sparse.find(tok);
    if (it != p.sparse.end()) s.sparse += w * it->second;
  }
  for (const auto& qi : q.multi) {
    double best = -INFINITY;
    for (const auto& pj : p.multi) best = std::max(best, dot(qi, pj));
    s.multi += best;
  }
  s.multi /= static_cast<double>(q.multi.size());
  return s;
}

struct Hit {
  std::size_t position;
  std::string id;
  double s_rank;
};

// Scores every demonstration, then orders by (score desc, corpus position asc).
inline std::vector<Hit> topk(const afsp::Corpus& corpus, const std::vector<Repr>& demo_reprs, const Repr& query,
                             const afsp::Weights& w, std::size_t k) {
  std::vector<Hit> all;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Scores s = score(query, demo_reprs[i]);
    all.push_back({i, corpus[i].id, w.dense * s.dense + w.sparse * s.sparse + w.multi * s.multi});
  }
  std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.s_rank > b.s_rank; });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace oracle
