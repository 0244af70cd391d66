#include "arc/commit/signature.hpp"

#include <sodium.h>

#include <stdexcept>

namespace arc {
namespace {

void ensure_sodium() {
  static const int ok = sodium_init();
  if (ok < 0) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

KeyPair KeyPair::from_seed(const Digest& seed) {
  ensure_sodium();
  KeyPair k;
  crypto_sign_seed_keypair(k.pk.data(), k.sk.data(), seed.data());
  return k;
}

KeyPair KeyPair::derive(std::uint64_t seed, std::string_view label) {
  ByteWriter w;
  w.u64(seed);
  w.prefixed(label);
  return from_seed(sha256("arc/keygen", w.bytes()));
}

Signature sign(const KeyPair& key, ByteSpan msg) {
  ensure_sodium();
  Signature s;
  crypto_sign_detached(s.data(), nullptr, msg.data(), msg.size(), key.sk.data());
  return s;
}

bool verify(const PublicKey& pk, ByteSpan msg, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

std::vector<Signature> dist_sign_emulated(std::span<const KeyPair> keys, ByteSpan msg) {
  std::vector<Signature> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(sign(k, msg));
  return out;
}

std::optional<std::size_t> dist_verify(std::span<const PublicKey> pks, ByteSpan msg,
                                       std::span<const Signature> sigs) {
  for (std::size_t i = 0; i < pks.size(); ++i) {
    if (i >= sigs.size() || !verify(pks[i], msg, sigs[i])) return i;
  }
  if (sigs.size() > pks.size()) return pks.size();
  return std::nullopt;
}

}  // namespace arc
