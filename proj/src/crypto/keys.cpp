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

#include "tim/crypto/keys.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <memory>

#include "tim/codec.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"

namespace tim::crypto {
namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

constexpr std::uint8_t kPublicKeyVersion = 1;
constexpr std::uint8_t kHybridVersion = 1;
constexpr std::size_t kIvSize = 12;
constexpr std::size_t kTagSize = 16;
constexpr std::size_t kKeySize = 32;
constexpr std::string_view kHybridInfo = "tim-hybrid/v1";

[[noreturn]] void integrity_failure(const char* what) {
  throw TimError(Errc::integrity_failure, what);
}

PkeyPtr private_pkey(int type, ByteView secret) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(type, nullptr, secret.data(), secret.size()),
              EVP_PKEY_free);
  if (!key) throw TimError(Errc::format_error, "invalid private key material");
  return key;
}

RawKey raw_public(const EVP_PKEY* key) {
  RawKey out{};
  std::size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != out.size())
    throw TimError(Errc::format_error, "cannot extract public key");
  return out;
}

// Returns false when the peer key is a low-order point or otherwise unusable.
bool x25519_shared(ByteView own_secret, const RawKey& peer_public, SecureBytes& shared) {
  PkeyPtr own = private_pkey(EVP_PKEY_X25519, own_secret);
  PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(),
                                           peer_public.size()),
               EVP_PKEY_free);
  if (!peer) return false;
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(own.get(), nullptr), EVP_PKEY_CTX_free);
  std::size_t len = 0;
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
      EVP_PKEY_derive(ctx.get(), nullptr, &len) != 1)
    return false;
  shared.assign(len, 0);
  if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1) return false;
  shared.resize(len);
  return true;
}

SecureBytes hkdf_sha256(ByteView secret, ByteView salt, std::string_view info) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr), EVP_PKEY_CTX_free);
  SecureBytes out(kKeySize);
  std::size_t len = out.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), secret.data(), static_cast<int>(secret.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), reinterpret_cast<const unsigned char*>(info.data()),
                                  static_cast<int>(info.size())) != 1 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != kKeySize)
    throw TimError(Errc::io_error, "hkdf failed");
  return out;
}

// Appends IV | body | tag to `out`.
void gcm_encrypt(ByteView key, ByteView iv, ByteView aad, ByteView plaintext, Bytes& out) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  const std::size_t base = out.size();
  out.insert(out.end(), iv.begin(), iv.end());
  out.resize(base + kIvSize + plaintext.size() + kTagSize);
  std::uint8_t* body = out.data() + base + kIvSize;
  int len = 0;
  int total = 0;
  bool ok = ctx && EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kIvSize, nullptr) == 1 &&
            EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), iv.data()) == 1;
  if (ok && !aad.empty())
    ok = EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
  ok = ok && EVP_EncryptUpdate(ctx.get(), body, &len, plaintext.data(),
                               static_cast<int>(plaintext.size())) == 1;
  total = len;
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), body + total, &len) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize,
                                 body + plaintext.size()) == 1;
  if (!ok) throw TimError(Errc::io_error, "aes-gcm encryption failed");
}

SecureBytes gcm_decrypt(ByteView key, ByteView aad, ByteView sealed) {
  if (sealed.size() < kIvSize + kTagSize) integrity_failure("ciphertext too short");
  ByteView iv = sealed.first(kIvSize);
  ByteView body = sealed.subspan(kIvSize, sealed.size() - kIvSize - kTagSize);
  ByteView tag = sealed.last(kTagSize);
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  SecureBytes out(body.size() + 16);
  int len = 0;
  bool ok = ctx && EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kIvSize, nullptr) == 1 &&
            EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), iv.data()) == 1;
  if (ok && !aad.empty())
    ok = EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
  ok = ok && EVP_DecryptUpdate(ctx.get(), out.data(), &len, body.data(),
                               static_cast<int>(body.size())) == 1;
  int total = len;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize,
                                 const_cast<std::uint8_t*>(tag.data())) == 1;
  ok = ok && EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &len) == 1;
  if (!ok) integrity_failure("authenticated decryption failed");
  out.resize(static_cast<std::size_t>(total + len));
  return out;
}

RawKey to_raw(ByteView b) {
  if (b.size() != kKeySize) throw TimError(Errc::format_error, "raw key must be 32 bytes");
  RawKey out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace

std::string_view purpose_name(KeyPurpose p) noexcept {
  switch (p) {
    case KeyPurpose::pal: return "pal";
    case KeyPurpose::proxy: return "proxy";
    case KeyPurpose::aik: return "aik";
    case KeyPurpose::ek: return "ek";
    case KeyPurpose::ca: return "ca";
    case KeyPurpose::site: return "site";
  }
  return "unknown";
}

Bytes PublicKey::encode() const {
  Writer w;
  w.u8(kPublicKeyVersion).blob(enc_).blob(sig_);
  return std::move(w).bytes();
}

PublicKey PublicKey::decode(ByteView in) {
  Reader r(in);
  if (r.u8() != kPublicKeyVersion) throw TimError(Errc::format_error, "unsupported public key version");
  RawKey enc = to_raw(r.blob());
  RawKey sig = to_raw(r.blob());
  r.expect_done("public key");
  return PublicKey(enc, sig);
}

Digest PublicKey::key_id() const { return hash(encode()); }

KeyPair KeyPair::from_secrets(KeyPurpose purpose, ByteView enc_secret, ByteView sig_secret) {
  KeyPair kp;
  kp.purpose_ = purpose;
  kp.enc_secret_ = to_secure(enc_secret);
  kp.sig_secret_ = to_secure(sig_secret);
  PkeyPtr enc = private_pkey(EVP_PKEY_X25519, enc_secret);
  PkeyPtr sig = private_pkey(EVP_PKEY_ED25519, sig_secret);
  kp.public_ = PublicKey(raw_public(enc.get()), raw_public(sig.get()));
  kp.key_id_ = kp.public_.key_id();
  return kp;
}

SecureBytes KeyPair::encode_private() const {
  SecureBytes out;
  out.reserve(1 + 2 * kKeySize);
  out.push_back(static_cast<std::uint8_t>(purpose_));
  out.insert(out.end(), enc_secret_.begin(), enc_secret_.end());
  out.insert(out.end(), sig_secret_.begin(), sig_secret_.end());
  return out;
}

KeyPair KeyPair::decode_private(ByteView in) {
  if (in.size() != 1 + 2 * kKeySize) throw TimError(Errc::format_error, "bad private key encoding");
  auto purpose = static_cast<KeyPurpose>(in[0]);
  if (in[0] < 1 || in[0] > 6) throw TimError(Errc::format_error, "bad key purpose");
  return from_secrets(purpose, in.subspan(1, kKeySize), in.subspan(1 + kKeySize, kKeySize));
}

KeyPair generate_keypair(KeyPurpose purpose, Rng& rng) {
  SecureBytes enc = rng.secure_bytes(kKeySize);
  SecureBytes sig = rng.secure_bytes(kKeySize);
  return KeyPair::from_secrets(purpose, enc, sig);
}

Bytes encrypt(const PublicKey& recipient, ByteView plaintext, Rng& rng) {
  if (plaintext.empty()) throw TimError(Errc::usage, "plaintext must be non-empty");
  SecureBytes eph_secret = rng.secure_bytes(kKeySize);
  PkeyPtr eph = private_pkey(EVP_PKEY_X25519, eph_secret);
  RawKey eph_public = raw_public(eph.get());

  SecureBytes shared;
  if (!x25519_shared(eph_secret, recipient.encryption_key(), shared))
    throw TimError(Errc::usage, "recipient public key is not usable for encryption");
  Bytes salt = concat(eph_public, recipient.encryption_key());
  SecureBytes key = hkdf_sha256(shared, salt, kHybridInfo);

  Bytes out;
  out.reserve(1 + kKeySize + kIvSize + plaintext.size() + kTagSize);
  out.push_back(kHybridVersion);
  out.insert(out.end(), eph_public.begin(), eph_public.end());
  Bytes aad(out.begin(), out.end());
  Bytes iv = rng.bytes(kIvSize);
  gcm_encrypt(key, iv, aad, plaintext, out);
  return out;
}

SecureBytes decrypt(const KeyPair& recipient, ByteView ciphertext) {
  if (ciphertext.size() < 1 + kKeySize + kIvSize + kTagSize) integrity_failure("ciphertext too short");
  if (ciphertext[0] != kHybridVersion) integrity_failure("unsupported ciphertext version");
  RawKey eph_public = to_raw(ciphertext.subspan(1, kKeySize));
  SecureBytes shared;
  if (!x25519_shared(recipient.enc_secret_, eph_public, shared))
    integrity_failure("invalid ephemeral key");
  Bytes salt = concat(eph_public, recipient.public_key().encryption_key());
  SecureBytes key = hkdf_sha256(shared, salt, kHybridInfo);
  return gcm_decrypt(key, ciphertext.first(1 + kKeySize), ciphertext.subspan(1 + kKeySize));
}

Bytes sign(const KeyPair& signer, ByteView message) {
  PkeyPtr key = private_pkey(EVP_PKEY_ED25519, signer.sig_secret_);
  MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  Bytes sig(64);
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
    throw TimError(Errc::io_error, "ed25519 signing failed");
  sig.resize(len);
  return sig;
}

bool verify(const PublicKey& signer, ByteView message, ByteView signature) noexcept {
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, signer.signing_key().data(),
                                          signer.signing_key().size()),
              EVP_PKEY_free);
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

Bytes aead_seal(ByteView key, ByteView aad, ByteView plaintext, Rng& rng) {
  if (key.size() != kKeySize) throw TimError(Errc::usage, "aead key must be 32 bytes");
  Bytes out;
  Bytes iv = rng.bytes(kIvSize);
  gcm_encrypt(key, iv, aad, plaintext, out);
  return out;
}

SecureBytes aead_open(ByteView key, ByteView aad, ByteView sealed) {
  if (key.size() != kKeySize) throw TimError(Errc::usage, "aead key must be 32 bytes");
  return gcm_decrypt(key, aad, sealed);
}

}  // namespace tim::crypto
