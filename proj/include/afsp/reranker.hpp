#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "afsp/degeneration.hpp"
#include "afsp/hashing.hpp"

namespace afsp {

// Pointwise translation-quality scorer: candidate text in, score in (0, 1)
// out. No source conditioning.
class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual double score(std::string_view text) const = 0;
  virtual std::string description() const = 0;
};

// Sorted by slot, no duplicate slots.
struct SparseFeatures {
  std::vector<std::pair<std::uint32_t, double>> entries;
};

inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 18;
inline constexpr std::uint32_t kDenseFeatureSlots = 2;

// Character n-grams (n = 1..4, over code points) hashed into the first
// feature_dim - 2 slots and L2-normalized; the last two slots hold
// min(1, tokens / 100) and the CJK character fraction.
SparseFeatures featurize(std::string_view text, std::uint32_t feature_dim, std::uint64_t hash_seed);

// Linear model over hashed features followed by a sigmoid.
class NGramRegressor final : public QualityScorer {
 public:
  NGramRegressor(std::uint32_t feature_dim, std::uint64_t hash_seed);
  NGramRegressor(std::uint32_t feature_dim, std::uint64_t hash_seed, std::vector<float> weights, float bias);

  double score(std::string_view text) const override;
  std::string description() const override;

  double logit(const SparseFeatures& features) const;
  SparseFeatures featurize(std::string_view text) const;

  std::uint32_t feature_dim() const noexcept { return feature_dim_; }
  std::uint64_t hash_seed() const noexcept { return hash_seed_; }
  const std::vector<float>& weights() const noexcept { return weights_; }
  float bias() const noexcept { return bias_; }

  // "AFSPRRK1", u32 feature_dim, u64 hash_seed, feature_dim float32 weights,
  // float32 bias, then the SHA-256 of everything before it.
  std::string serialize() const;
  static NGramRegressor deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static NGramRegressor load(const std::filesystem::path& path);
  Digest fingerprint() const;

  bool operator==(const NGramRegressor& o) const {
    return feature_dim_ == o.feature_dim_ && hash_seed_ == o.hash_seed_ && weights_ == o.weights_ && bias_ == o.bias_;
  }

 private:
  std::uint32_t feature_dim_;
  std::uint64_t hash_seed_;
  std::vector<float> weights_;
  float bias_ = 0.0f;
};

// kAdagrad scales each coordinate's step by the inverse root of its summed
// squared gradients.
enum class Optimizer { kSgd, kAdagrad };

std::string_view optimizer_name(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct TrainOptions {
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  Optimizer optimizer = Optimizer::kAdagrad;
  std::uint64_t seed = 0;
  std::uint32_t feature_dim = kDefaultFeatureDim;
  std::uint64_t hash_seed = 0;
};

struct TrainReport {
  double initial_mse = 0.0;
  std::vector<double> epoch_mse;  // one per epoch, over the full dataset
  Digest fingerprint{};
};

struct TrainResult {
  NGramRegressor model;
  TrainReport report;
};

// Seeded shuffled mini-batch gradient descent on the mean squared error
// between sigmoid(w.x + b) and the example score.
TrainResult train(const std::vector<RerankerExample>& dataset, const TrainOptions& options);

struct RankedCandidate {
  std::size_t index = 0;
  double score = 0.0;
};

// Descending score; ties keep the original candidate order.
std::vector<RankedCandidate> rank(const QualityScorer& scorer, const std::vector<std::string>& candidates);

}  // namespace afsp
