#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "arc/algebra/bytes.hpp"

namespace arc {

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

// Ed25519 key pair.
struct KeyPair {
  PublicKey pk{};
  std::array<std::uint8_t, 64> sk{};

  static KeyPair from_seed(const Digest& seed);
  static KeyPair derive(std::uint64_t seed, std::string_view label);
};

Signature sign(const KeyPair& key, ByteSpan msg);
bool verify(const PublicKey& pk, ByteSpan msg, const Signature& sig);

// One signature per computing party over the same message.
std::vector<Signature> dist_sign_emulated(std::span<const KeyPair> keys, ByteSpan msg);
// Index of the first signer whose signature fails, or nullopt if all verify.
// A length mismatch blames the first missing index.
std::optional<std::size_t> dist_verify(std::span<const PublicKey> pks, ByteSpan msg,
                                       std::span<const Signature> sigs);

}  // namespace arc
