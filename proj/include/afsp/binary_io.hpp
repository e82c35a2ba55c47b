#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "afsp/error.hpp"

namespace afsp {

// Little-endian serialization into an in-memory buffer.
class BinaryWriter {
 public:
  void magic(std::string_view tag) { buffer_.append(tag); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  // u32 byte length followed by the bytes.
  void str(std::string_view s);
  void raw(std::span<const std::uint8_t> bytes);

  const std::string& buffer() const noexcept { return buffer_; }

 private:
  std::string buffer_;
};

// Bounds-checked reader. Running past the end throws Error(truncation_code).
class BinaryReader {
 public:
  BinaryReader(std::string_view data, ErrorCode truncation_code)
      : data_(data), truncation_code_(truncation_code) {}

  // Throws VersionMismatch when the next bytes are not `tag`.
  void expect_magic(std::string_view tag);
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str();
  void raw(std::span<std::uint8_t> out);

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  std::string_view take(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
  ErrorCode truncation_code_;
};

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace afsp
