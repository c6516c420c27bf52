// Copyright 2026 The tim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tim/crypto/rng.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <memory>

#include "tim/codec.hpp"
#include "tim/error.hpp"

namespace tim::crypto {

Rng::Rng(std::uint64_t seed, std::string_view stream) {
  Writer w;
  w.str("tim-rng/v1").u64(seed).str(stream);
  const Bytes& material = w.bytes();
  SHA256(material.data(), material.size(), key_.data());
}

Rng Rng::from_entropy(std::string_view stream) {
  std::uint64_t seed = 0;
  if (RAND_bytes(reinterpret_cast<unsigned char*>(&seed), sizeof(seed)) != 1)
    throw TimError(Errc::io_error, "system entropy source unavailable");
  return Rng(seed, stream);
}

void Rng::refill() {
  // ChaCha20 IV in OpenSSL is 4 bytes little-endian counter + 12 bytes nonce.
  // Each refill encrypts one zero block under a fresh 96-bit nonce = block_.
  std::array<std::uint8_t, 16> iv{};
  for (int i = 0; i < 8; ++i) iv[4 + i] = static_cast<std::uint8_t>(block_ >> (8 * i));
  ++block_;

  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                       EVP_CIPHER_CTX_free);
  std::array<std::uint8_t, 64> zeros{};
  int len = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_chacha20(), nullptr, key_.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), buffer_.data(), &len, zeros.data(),
                        static_cast<int>(zeros.size())) != 1 ||
      len != static_cast<int>(buffer_.size())) {
    throw TimError(Errc::io_error, "chacha20 keystream failed");
  }
  buffered_ = buffer_.size();
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (buffered_ == 0) refill();
    out[i] = buffer_[buffer_.size() - buffered_];
    --buffered_;
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

SecureBytes Rng::secure_bytes(std::size_t n) {
  SecureBytes out(n);
  fill(out);
  return out;
}

Nonce Rng::nonce() {
  std::array<std::uint8_t, Nonce::kSize> a{};
  fill(a);
  return Nonce(a);
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> a{};
  fill(a);
  std::uint64_t v = 0;
  for (std::uint8_t x : a) v = (v << 8) | x;
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw TimError(Errc::usage, "uniform bound must be non-zero");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

}  // namespace tim::crypto
