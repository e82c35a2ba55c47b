#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace afsp {

// 64-bit FNV-1a. The seed is folded into the offset basis so that distinct
// seeds give unrelated hash families.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

// SplitMix64 finalizer; used to derive independent RNG seeds from a parent
// seed and a key.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view key);

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::byte> bytes);
  Sha256& update(std::string_view bytes);
  template <typename T>
  Sha256& update_pod(const T& value) {
    return update(std::as_bytes(std::span<const T>(&value, 1)));
  }
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::string_view bytes);
std::string to_hex(const Digest& digest);

}  // namespace afsp
