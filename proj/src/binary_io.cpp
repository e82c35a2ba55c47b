#include "afsp/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace afsp {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(std::string_view bytes) {
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void BinaryWriter::u32(std::uint32_t v) { put_le(buffer_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(buffer_, v); }
void BinaryWriter::f32(float v) { put_le(buffer_, v); }
void BinaryWriter::f64(double v) { put_le(buffer_, v); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buffer_.append(s);
}

void BinaryWriter::raw(std::span<const std::uint8_t> bytes) {
  buffer_.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::string_view BinaryReader::take(std::size_t n) {
  if (remaining() < n) {
    throw Error(truncation_code_, "unexpected end of data at byte " + std::to_string(pos_));
  }
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

void BinaryReader::expect_magic(std::string_view tag) {
  if (remaining() < tag.size() || data_.substr(pos_, tag.size()) != tag) {
    throw Error(ErrorCode::kVersionMismatch, "expected header '" + std::string(tag) + "'");
  }
  pos_ += tag.size();
}

std::uint32_t BinaryReader::u32() { return get_le<std::uint32_t>(take(4)); }
std::uint64_t BinaryReader::u64() { return get_le<std::uint64_t>(take(8)); }
float BinaryReader::f32() { return get_le<float>(take(4)); }
double BinaryReader::f64() { return get_le<double>(take(8)); }

std::string BinaryReader::str() {
  const auto n = u32();
  return std::string(take(n));
}

void BinaryReader::raw(std::span<std::uint8_t> out) {
  auto bytes = take(out.size());
  std::memcpy(out.data(), bytes.data(), out.size());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::kIoFailure, "read failed for " + path.string());
  }
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoFailure, "cannot open " + tmp.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) {
      throw Error(ErrorCode::kIoFailure, "write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace afsp
