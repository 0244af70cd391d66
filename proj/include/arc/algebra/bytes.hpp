#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arc {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Append-only big-endian writer. Every variable-width field is written with a
// 4-byte big-endian length prefix.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void raw(ByteSpan b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void prefixed(ByteSpan b);
  void prefixed(std::string_view s);

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteSpan in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteSpan raw(std::size_t n);
  ByteSpan prefixed();
  std::string prefixed_string();

  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }
  void expect_done() const;

 private:
  ByteSpan in_;
  std::size_t pos_ = 0;
};

std::string to_hex(ByteSpan b);
Bytes from_hex(std::string_view hex);

using Digest = std::array<std::uint8_t, 32>;
Digest sha256(ByteSpan data);
Digest sha256(std::string_view tag, ByteSpan data);

}  // namespace arc
