#include "afsp/reranker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"
#include "afsp/rng.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

constexpr std::string_view kModelMagic = "AFSPRRK1";
constexpr int kMaxNgram = 4;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dim(std::uint32_t feature_dim) {
  if (feature_dim <= kDenseFeatureSlots) {
    throw Error(ErrorCode::kInvalidArgument, "feature_dim must exceed " + std::to_string(kDenseFeatureSlots));
  }
}

double dataset_mse(const std::vector<SparseFeatures>& features, const std::vector<double>& targets,
                   const std::vector<double>& weights, double bias) {
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double z = bias;
    for (const auto& [slot, x] : features[i].entries) z += weights[slot] * x;
    const double err = sigmoid(z) - targets[i];
    total += err * err;
  }
  return total / static_cast<double>(features.size());
}

}  // namespace

SparseFeatures featurize(std::string_view input, std::uint32_t feature_dim, std::uint64_t hash_seed) {
  check_dim(feature_dim);
  const auto trimmed = text::trim(input);
  if (text::is_blank(trimmed)) {
    throw Error(ErrorCode::kEmptyText, "cannot featurize empty text");
  }
  const std::u32string cps = text::decode_utf8(trimmed);
  const std::uint32_t hashed_slots = feature_dim - kDenseFeatureSlots;
  std::map<std::uint32_t, double> counts;
  std::string gram;
  for (int n = 1; n <= kMaxNgram; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i) {
      gram.clear();
      for (int k = 0; k < n; ++k) text::append_utf8(gram, cps[i + static_cast<std::size_t>(k)]);
      counts[static_cast<std::uint32_t>(fnv1a64(gram, hash_seed) % hashed_slots)] += 1.0;
    }
  }
  double norm = 0.0;
  for (const auto& [slot, c] : counts) norm += c * c;
  norm = std::sqrt(norm);

  SparseFeatures out;
  out.entries.reserve(counts.size() + kDenseFeatureSlots);
  for (const auto& [slot, c] : counts) out.entries.emplace_back(slot, c / norm);
  const double tokens = static_cast<double>(text::segment_words(trimmed).size());
  const double length_feature = std::min(1.0, tokens / 100.0);
  const double cjk = text::cjk_fraction(trimmed);
  out.entries.emplace_back(hashed_slots, length_feature);
  out.entries.emplace_back(hashed_slots + 1, cjk);
  return out;
}

NGramRegressor::NGramRegressor(std::uint32_t feature_dim, std::uint64_t hash_seed)
    : feature_dim_(feature_dim), hash_seed_(hash_seed) {
  check_dim(feature_dim);
  weights_.assign(feature_dim, 0.0f);
}

NGramRegressor::NGramRegressor(std::uint32_t feature_dim, std::uint64_t hash_seed, std::vector<float> weights,
                               float bias)
    : feature_dim_(feature_dim), hash_seed_(hash_seed), weights_(std::move(weights)), bias_(bias) {
  check_dim(feature_dim);
  if (weights_.size() != feature_dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(weights_.size()) + " weights for feature_dim " + std::to_string(feature_dim_));
  }
  if (!std::isfinite(bias_) || !std::all_of(weights_.begin(), weights_.end(), [](float w) { return std::isfinite(w); })) {
    throw Error(ErrorCode::kNonFiniteLoss, "model parameters are not finite");
  }
}

SparseFeatures NGramRegressor::featurize(std::string_view text) const {
  return afsp::featurize(text, feature_dim_, hash_seed_);
}

double NGramRegressor::logit(const SparseFeatures& features) const {
  double z = bias_;
  for (const auto& [slot, x] : features.entries) z += static_cast<double>(weights_[slot]) * x;
  return z;
}

double NGramRegressor::score(std::string_view text) const { return sigmoid(logit(featurize(text))); }

std::string NGramRegressor::description() const {
  return "hashed char 1-4-gram linear-sigmoid regressor, feature_dim=" + std::to_string(feature_dim_) +
         ", hash_seed=" + std::to_string(hash_seed_);
}

std::string NGramRegressor::serialize() const {
  BinaryWriter w;
  w.magic(kModelMagic);
  w.u32(feature_dim_);
  w.u64(hash_seed_);
  for (float x : weights_) w.f32(x);
  w.f32(bias_);
  const auto digest = sha256(w.buffer());
  w.raw(digest);
  return w.buffer();
}

NGramRegressor NGramRegressor::deserialize(std::string_view bytes) {
  BinaryReader r(bytes, ErrorCode::kVersionMismatch);
  r.expect_magic(kModelMagic);
  const auto dim = r.u32();
  const auto hash_seed = r.u64();
  const std::size_t expected = static_cast<std::size_t>(dim) * 4 + 4 + 32;
  if (r.remaining() != expected) {
    throw Error(ErrorCode::kVersionMismatch, "model payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                                                 std::to_string(expected));
  }
  std::vector<float> weights(dim);
  for (float& x : weights) x = r.f32();
  const float bias = r.f32();
  Digest stored{};
  r.raw(stored);
  if (stored != sha256(bytes.substr(0, bytes.size() - stored.size()))) {
    throw Error(ErrorCode::kVersionMismatch, "model checksum does not match its contents");
  }
  return NGramRegressor(dim, hash_seed, std::move(weights), bias);
}

void NGramRegressor::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

NGramRegressor NGramRegressor::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

Digest NGramRegressor::fingerprint() const {
  const auto bytes = serialize();
  Digest d{};
  std::copy(bytes.end() - static_cast<std::ptrdiff_t>(d.size()), bytes.end(), d.begin());
  return d;
}

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::kSgd ? "sgd" : "adagrad"; }

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::kSgd;
  if (name == "adagrad") return Optimizer::kAdagrad;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

TrainResult train(const std::vector<RerankerExample>& dataset, const TrainOptions& options) {
  if (dataset.size() < 10) {
    throw Error(ErrorCode::kDegenerateDataset, "need at least 10 examples, got " + std::to_string(dataset.size()));
  }
  std::set<double> distinct;
  for (const auto& ex : dataset) distinct.insert(ex.score);
  if (distinct.size() < 2) {
    throw Error(ErrorCode::kDegenerateDataset, "all examples have the same score");
  }
  if (options.epochs == 0 || options.batch_size == 0 || !(options.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epochs, batch_size and learning_rate must be positive");
  }
  check_dim(options.feature_dim);

  std::vector<SparseFeatures> features;
  std::vector<double> targets;
  features.reserve(dataset.size());
  targets.reserve(dataset.size());
  for (const auto& ex : dataset) {
    features.push_back(featurize(ex.text, options.feature_dim, options.hash_seed));
    targets.push_back(ex.score);
  }

  std::vector<double> weights(options.feature_dim, 0.0);
  double bias = 0.0;
  std::vector<double> grad(options.feature_dim, 0.0);
  std::vector<std::uint32_t> touched;
  // Squared-gradient sums; unused by plain SGD.
  std::vector<double> accum(options.feature_dim, 0.0);
  double bias_accum = 0.0;
  const auto step = [&options](double g, double& sum) {
    if (options.optimizer == Optimizer::kSgd) return options.learning_rate * g;
    sum += g * g;
    return sum > 0.0 ? options.learning_rate * g / std::sqrt(sum) : 0.0;
  };

  TrainReport report;
  report.initial_mse = dataset_mse(features, targets, weights, bias);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      double grad_bias = 0.0;
      touched.clear();
      for (std::size_t b = start; b < end; ++b) {
        const auto& f = features[order[b]];
        double z = bias;
        for (const auto& [slot, x] : f.entries) z += weights[slot] * x;
        const double p = sigmoid(z);
        // d/dz (p - s)^2 = 2 (p - s) p (1 - p)
        const double g = 2.0 * (p - targets[order[b]]) * p * (1.0 - p) * inv;
        if (!std::isfinite(g)) {
          throw Error(ErrorCode::kNonFiniteLoss, "gradient became non-finite in epoch " + std::to_string(epoch + 1));
        }
        grad_bias += g;
        for (const auto& [slot, x] : f.entries) {
          if (grad[slot] == 0.0) touched.push_back(slot);
          grad[slot] += g * x;
        }
      }
      bias -= step(grad_bias, bias_accum);
      for (auto slot : touched) {
        weights[slot] -= step(grad[slot], accum[slot]);
        grad[slot] = 0.0;
      }
    }
    const double mse = dataset_mse(features, targets, weights, bias);
    if (!std::isfinite(mse)) {
      throw Error(ErrorCode::kNonFiniteLoss, "loss became non-finite in epoch " + std::to_string(epoch + 1));
    }
    report.epoch_mse.push_back(mse);
  }

  std::vector<float> final_weights(weights.begin(), weights.end());
  NGramRegressor model(options.feature_dim, options.hash_seed, std::move(final_weights), static_cast<float>(bias));
  report.fingerprint = model.fingerprint();
  return {std::move(model), std::move(report)};
}

std::vector<RankedCandidate> rank(const QualityScorer& scorer, const std::vector<std::string>& candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kEmptyCandidateList, "nothing to rank");
  }
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (text::is_blank(candidates[i])) {
      throw Error(ErrorCode::kEmptyText, "candidate " + std::to_string(i) + " is empty");
    }
    out.push_back({i, scorer.score(candidates[i])});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) { return a.score > b.score; });
  return out;
}

}  // namespace afsp
