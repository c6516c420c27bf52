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

// Asymmetric keys.
//
// A key pair carries two curve keys: X25519 for hybrid encryption and Ed25519
// for signatures. Both are generated from the injected Rng, so key generation
// is reproducible under a fixed seed (RSA key generation in OpenSSL draws from
// its own DRBG and cannot be replayed). Security level is ~128 bits, above
// RSA-2048.
//
// Hybrid ciphertext layout (version 1):
//   u8 version = 1 | 32 ephemeral X25519 public | 12 IV | body | 16 GCM tag
// The AES-256-GCM key is HKDF-SHA256(shared secret,
//   salt = ephemeral public || recipient X25519 public, info = "tim-hybrid/v1").
// The version byte and the ephemeral key are bound as additional data, so any
// corruption anywhere in the ciphertext fails authentication.

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "tim/bytes.hpp"
#include "tim/crypto/rng.hpp"

namespace tim::crypto {

enum class KeyPurpose : std::uint8_t { pal = 1, proxy = 2, aik = 3, ek = 4, ca = 5, site = 6 };

std::string_view purpose_name(KeyPurpose p) noexcept;

using RawKey = std::array<std::uint8_t, 32>;

class PublicKey {
 public:
  PublicKey() = default;
  PublicKey(const RawKey& encryption, const RawKey& signing) : enc_(encryption), sig_(signing) {}

  // Canonical encoding: u8 version = 1, u32 32, X25519 public,
  // u32 32, Ed25519 public.
  Bytes encode() const;
  static PublicKey decode(ByteView in);

  // hash(encode()).
  Digest key_id() const;

  const RawKey& encryption_key() const noexcept { return enc_; }
  const RawKey& signing_key() const noexcept { return sig_; }

  friend bool operator==(const PublicKey&, const PublicKey&) = default;

 private:
  RawKey enc_{};
  RawKey sig_{};
};

class KeyPair {
 public:
  const PublicKey& public_key() const noexcept { return public_; }
  const Digest& key_id() const noexcept { return key_id_; }
  KeyPurpose purpose() const noexcept { return purpose_; }

  // u8 purpose, 32 X25519 private, 32 Ed25519 private. Secret material.
  SecureBytes encode_private() const;
  static KeyPair decode_private(ByteView in);

 private:
  friend KeyPair generate_keypair(KeyPurpose, Rng&);
  friend SecureBytes decrypt(const KeyPair&, ByteView);
  friend Bytes sign(const KeyPair&, ByteView);
  static KeyPair from_secrets(KeyPurpose purpose, ByteView enc_secret, ByteView sig_secret);

  PublicKey public_;
  Digest key_id_;
  KeyPurpose purpose_ = KeyPurpose::pal;
  SecureBytes enc_secret_;
  SecureBytes sig_secret_;
};

KeyPair generate_keypair(KeyPurpose purpose, Rng& rng);

// Randomized hybrid encryption. Throws TimError(usage) on empty plaintext.
Bytes encrypt(const PublicKey& recipient, ByteView plaintext, Rng& rng);
// Throws TimError(integrity_failure) for a wrong key or any corruption.
SecureBytes decrypt(const KeyPair& recipient, ByteView ciphertext);

// Ed25519 (deterministic).
Bytes sign(const KeyPair& signer, ByteView message);
bool verify(const PublicKey& signer, ByteView message, ByteView signature) noexcept;

// AES-256-GCM with a caller-supplied key, used by the TPM's storage root key.
// Layout: 12 IV | body | 16 tag. `aad` is authenticated but not stored.
Bytes aead_seal(ByteView key, ByteView aad, ByteView plaintext, Rng& rng);
SecureBytes aead_open(ByteView key, ByteView aad, ByteView sealed);

}  // namespace tim::crypto
