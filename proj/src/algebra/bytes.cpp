#include "arc/algebra/bytes.hpp"

#include <sodium.h>

namespace arc {

void ByteWriter::u32(std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::prefixed(ByteSpan b) {
  if (b.size() > UINT32_MAX) throw std::length_error("field too long for 4-byte length prefix");
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

void ByteWriter::prefixed(std::string_view s) {
  prefixed(ByteSpan(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto b = raw(4);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::uint64_t ByteReader::u64() {
  auto b = raw(8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

ByteSpan ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw ParseError("truncated input");
  auto s = in_.subspan(pos_, n);
  pos_ += n;
  return s;
}

ByteSpan ByteReader::prefixed() { return raw(u32()); }

std::string ByteReader::prefixed_string() {
  auto b = prefixed();
  return std::string(b.begin(), b.end());
}

void ByteReader::expect_done() const {
  if (!done()) throw ParseError("trailing bytes after record");
}

std::string to_hex(ByteSpan b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto x : b) {
    s.push_back(digits[x >> 4]);
    s.push_back(digits[x & 15]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw ParseError("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ParseError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

Digest sha256(ByteSpan data) {
  Digest d;
  crypto_hash_sha256(d.data(), data.data(), data.size());
  return d;
}

Digest sha256(std::string_view tag, ByteSpan data) {
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  ByteWriter w;
  w.prefixed(tag);
  crypto_hash_sha256_update(&st, w.bytes().data(), w.bytes().size());
  crypto_hash_sha256_update(&st, data.data(), data.size());
  Digest d;
  crypto_hash_sha256_final(&st, d.data());
  return d;
}

}  // namespace arc
