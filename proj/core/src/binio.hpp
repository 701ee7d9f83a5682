// Internal byte-level helpers shared by the file formats.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "imb/error.hpp"

namespace imb::detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::open_failed, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

/// Writes via a temporary sibling and renames into place.
inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(IoError::Kind::open_failed, "write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(IoError::Kind::open_failed, "cannot rename onto " + path.string());
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value, std::endian order) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if (order != std::endian::native) std::reverse(std::begin(bytes), std::end(bytes));
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

/// Bounds-checked cursor over a byte buffer.
class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
  T get(std::endian order) {
    need(sizeof(T));
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if (order != std::endian::native) std::reverse(std::begin(raw), std::end(raw));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  const std::uint8_t* take(std::size_t n) {
    need(n);
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw IoError(IoError::Kind::truncated, what_ + ": truncated payload");
  }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace imb::detail
