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
#include "tim/pal/blocks.hpp"

#include "tim/codec.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"
#include "tim/pal/envelope.hpp"
#include "tim/pal/pass_list.hpp"

namespace tim::pal {
namespace {

constexpr std::string_view kPrivateKey = "private_key";
constexpr std::string_view kNonceField = "nonce";

// Unseal, tagging any failure with the step that attempted it.
SecureBytes unseal_at(const tpm::TpmEmulator& tpm, const tpm::SealedBlob& blob, std::string_view step) {
  try {
    return tpm.unseal(blob);
  } catch (const TimError& e) {
    throw TimError(e.code(), e.what(), std::string(step));
  }
}

tpm::SealedBlob seal_at(tpm::TpmEmulator& tpm, ByteView plaintext) {
  return tpm.seal(plaintext, tpm::kDrtmPcr);
}

// The PAL key pair sealed by block_secure_tunnel, after the nonce check.
crypto::KeyPair unseal_pal_key(const tpm::TpmEmulator& tpm, const tpm::SealedBlob& sealed_pal_priv,
                               const Nonce& nonce, std::string_view unseal_step,
                               std::string_view nonce_step) {
  SecureBytes plain = unseal_at(tpm, sealed_pal_priv, unseal_step);
  Fields f = Fields::decode(plain);
  Nonce sealed_nonce = f.get_fixed<Nonce>(kNonceField);
  if (!constant_time_equal(sealed_nonce.view(), nonce.view())) {
    f.clear();
    throw TimError(Errc::replay, "nonce does not match the sealed PAL key", std::string(nonce_step));
  }
  crypto::KeyPair key = crypto::KeyPair::decode_private(f.get(kPrivateKey));
  f.clear();
  return key;
}

SecureBytes decrypt_at(const crypto::KeyPair& key, ByteView ciphertext, std::string_view step) {
  try {
    return crypto::decrypt(key, ciphertext);
  } catch (const TimError& e) {
    throw TimError(e.code(), e.what(), std::string(step));
  }
}

PassList unseal_pass_list(const tpm::TpmEmulator& tpm, const tpm::SealedBlob& blob, std::string_view step) {
  SecureBytes plain = unseal_at(tpm, blob, step);
  return PassList::decode(plain);
}

}  // namespace

Digest verdict_measurement(bool accepted) {
  const std::uint8_t b = accepted ? kVerdictAccept : kVerdictReject;
  return crypto::hash(ByteView(&b, 1));
}

Digest tunnel_binding(const crypto::PublicKey& pal_pub, const Nonce& nonce) {
  Bytes encoded = pal_pub.encode();
  return crypto::hash_concat({encoded, nonce.view()});
}

Digest expected_proxy_key_pcr(const crypto::PublicKey& pm_pub) {
  return tpm::Sha1PcrTraits::extend(tpm::Sha1PcrTraits::initial(), crypto::hash(pm_pub.encode()));
}

tpm::SealedBlob block_initial_sealing(tpm::TpmEmulator& tpm, const crypto::PublicKey& pm_pub) {
  Digest expected = expected_proxy_key_pcr(pm_pub);
  if (tpm.read_pcr(tpm::kProxyKeyPcr) != expected) {
    throw TimError(Errc::key_provenance, "PCR15 does not hold the boot-time measurement of this key",
                   "initial-sealing.3b");
  }
  return seal_at(tpm, pm_pub.encode());
}

TunnelArtifacts block_secure_tunnel(tpm::TpmEmulator& tpm) {
  crypto::KeyPair key = crypto::generate_keypair(crypto::KeyPurpose::pal, tpm.rng());
  Nonce nonce = tpm.rng().nonce();
  Fields secret;
  secret.set(std::string(kPrivateKey), key.encode_private());
  secret.set(std::string(kNonceField), nonce);
  SecureBytes plain = secret.encode_secure();
  secret.clear();
  TunnelArtifacts out{key.public_key(), seal_at(tpm, plain), nonce};
  tpm.extend(tpm::kDrtmPcr, "tunnel-binding", tunnel_binding(out.pal_pub, nonce));
  return out;
}

SecureBytes block_data_extraction(tpm::TpmEmulator& tpm, ByteView enc_data,
                                  const tpm::SealedBlob& sealed_pal_priv, const Nonce& nonce) {
  crypto::KeyPair key = unseal_pal_key(tpm, sealed_pal_priv, nonce, "secure-tunnel.10a", "secure-tunnel.10b");
  return decrypt_at(key, enc_data, "secure-tunnel.10c");
}

RegistrationResult block_registration(tpm::TpmEmulator& tpm,
                                      const std::optional<tpm::SealedBlob>& sealed_pass_list,
                                      std::string_view user_id, std::string_view master_password,
                                      std::string_view secret_phrase) {
  if (user_id.empty() || master_password.empty() || secret_phrase.empty())
    throw TimError(Errc::schema_violation, "empty registration field", "registration.3b");
  PassList list;
  if (sealed_pass_list) list = unseal_pass_list(tpm, *sealed_pass_list, "registration.4b");

  PassEntry entry;
  entry.user_id = std::string(user_id);
  entry.salt = Salt::from(tpm.rng().bytes(Salt::kSize));
  entry.master_hash = master_hash(entry.salt, master_password);
  entry.otp_params.seed = to_hex(tpm.rng().bytes(8));
  entry.otp_params.count = otp::kDefaultCount;
  entry.otp = otp::initial_chain(secret_phrase, entry.otp_params);
  RegistrationResult out;
  out.otp_params = entry.otp_params;
  list.upsert(std::move(entry));

  SecureBytes plain = list.encode();
  out.sealed_pass_list = seal_at(tpm, plain);
  return out;
}

std::string_view kind_name(PasswordKind kind) noexcept {
  return kind == PasswordKind::master ? "master" : "otp";
}

std::optional<PasswordKind> kind_from_name(std::string_view name) noexcept {
  if (name == "master") return PasswordKind::master;
  if (name == "otp") return PasswordKind::otp;
  return std::nullopt;
}

AuthenticationResult block_authentication(tpm::TpmEmulator& tpm, const tpm::SealedBlob& sealed_pass_list,
                                          std::string_view user_id, std::string_view password,
                                          PasswordKind kind) {
  PassList list = unseal_pass_list(tpm, sealed_pass_list, "authentication.4a");
  PassEntry* entry = list.find(user_id);
  AuthenticationResult out;

  if (kind == PasswordKind::master) {
    // Unknown users pay for the same hash and comparison as known ones.
    static const Salt kDummySalt{};
    const Salt& salt = entry ? entry->salt : kDummySalt;
    Digest candidate = master_hash(salt, password);
    Digest stored = entry ? entry->master_hash : Digest{};
    out.verdict = constant_time_equal(candidate.view(), stored.view()) && entry != nullptr;
  } else {
    std::optional<Digest> candidate;
    try {
      candidate = otp::parse_password(password);
    } catch (const TimError&) {
    }
    if (!entry || !candidate) {
      crypto::hash(as_bytes(password));
    } else if (entry->otp.remaining == 0) {
      out.reason = "otp_exhausted";
    } else {
      otp::Verification v = otp::verify_and_advance(entry->otp, *candidate);
      out.verdict = v.accepted;
      if (v.accepted) {
        entry->otp = v.chain;
        SecureBytes plain = list.encode();
        out.sealed_pass_list = seal_at(tpm, plain);
      } else {
        // Already consumed passwords are the first (N - remaining) hashes of
        // the head.
        Digest walk = entry->otp.head;
        for (std::uint32_t used = entry->otp_params.count - entry->otp.remaining; used > 0; --used) {
          if (walk == *candidate) {
            out.reason = "otp_replay";
            break;
          }
          walk = crypto::hash(walk.view());
        }
      }
    }
  }

  tpm.extend(tpm::kDrtmPcr, "auth-verdict", verdict_measurement(out.verdict));
  return out;
}

Bytes block_credential_decryption(tpm::TpmEmulator& tpm, ByteView enc_cred_with_pal,
                                  const tpm::SealedBlob& sealed_pal_priv, const Nonce& nonce,
                                  const tpm::SealedBlob& sealed_pm_pub, const Nonce& nonce_prime) {
  SecureBytes pm_bytes = unseal_at(tpm, sealed_pm_pub, "credential-decryption.3a");
  crypto::PublicKey pm_pub = crypto::PublicKey::decode(pm_bytes);
  crypto::KeyPair key = unseal_pal_key(tpm, sealed_pal_priv, nonce, "credential-decryption.3b",
                                       "credential-decryption.3c");
  SecureBytes credentials = decrypt_at(key, enc_cred_with_pal, "credential-decryption.3d");
  Fields out;
  out.set(std::string(field::kCredentials), credentials);
  out.set(std::string(field::kNoncePrime), nonce_prime);
  SecureBytes plain = out.encode_secure();
  out.clear();
  return crypto::encrypt(pm_pub, plain, tpm.rng());
}

}  // namespace tim::pal
