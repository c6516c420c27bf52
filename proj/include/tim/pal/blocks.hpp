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

// The six PAL operation blocks. They run inside an open late-launch session
// and talk to the TPM directly; run_pal (pal.hpp) is the only production
// caller. Errors carry the protocol step label at which they were detected.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tim/bytes.hpp"
#include "tim/crypto/keys.hpp"
#include "tim/otp/otp.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::pal {

// Byte extended into PCR18 after a password check. Measured as hash({b}).
inline constexpr std::uint8_t kVerdictAccept = 0x01;
inline constexpr std::uint8_t kVerdictReject = 0x00;

Digest verdict_measurement(bool accepted);
// hash(pal_pub canonical encoding || nonce); the last PCR18 measurement of a
// secure-tunnel session.
Digest tunnel_binding(const crypto::PublicKey& pal_pub, const Nonce& nonce);

// Expected PCR15 after the single trusted-boot extend with hash(pm_pub).
Digest expected_proxy_key_pcr(const crypto::PublicKey& pm_pub);

// Seals pm_pub to PCR18 iff PCR15 proves it was the key measured at boot.
// Throws key_provenance (initial-sealing.3b).
tpm::SealedBlob block_initial_sealing(tpm::TpmEmulator& tpm, const crypto::PublicKey& pm_pub);

struct TunnelArtifacts {
  crypto::PublicKey pal_pub;
  tpm::SealedBlob sealed_pal_priv;
  Nonce nonce;
};

// Fresh PAL keypair and nonce; {private key, nonce} sealed to the current
// PCR18, then PCR18 extended with tunnel_binding(pal_pub, nonce).
TunnelArtifacts block_secure_tunnel(tpm::TpmEmulator& tpm);

// Unseals the PAL private key, checks its nonce (replay) and decrypts
// enc_data. The plaintext never leaves the PAL session.
SecureBytes block_data_extraction(tpm::TpmEmulator& tpm, ByteView enc_data,
                                  const tpm::SealedBlob& sealed_pal_priv, const Nonce& nonce);

struct RegistrationResult {
  otp::OtpParams otp_params;
  tpm::SealedBlob sealed_pass_list;
};

// Upserts the user into the (possibly absent) pass list and reseals it.
RegistrationResult block_registration(tpm::TpmEmulator& tpm,
                                      const std::optional<tpm::SealedBlob>& sealed_pass_list,
                                      std::string_view user_id, std::string_view master_password,
                                      std::string_view secret_phrase);

enum class PasswordKind { master, otp };

std::string_view kind_name(PasswordKind kind) noexcept;
std::optional<PasswordKind> kind_from_name(std::string_view name) noexcept;

struct AuthenticationResult {
  bool verdict = false;
  // Present when an OTP was consumed and the list had to be resealed.
  std::optional<tpm::SealedBlob> sealed_pass_list;
  // Non-secret refusal hint: "otp_replay" when the candidate is an already
  // consumed chain element, "otp_exhausted" when nothing is left.
  std::string reason;
};

// Checks the password, reseals the list if the OTP chain advanced, then
// extends PCR18 with verdict_measurement(verdict).
AuthenticationResult block_authentication(tpm::TpmEmulator& tpm, const tpm::SealedBlob& sealed_pass_list,
                                          std::string_view user_id, std::string_view password,
                                          PasswordKind kind);

// Returns encrypt(pm_pub, Fields{credentials, nonce_prime}).
Bytes block_credential_decryption(tpm::TpmEmulator& tpm, ByteView enc_cred_with_pal,
                                  const tpm::SealedBlob& sealed_pal_priv, const Nonce& nonce,
                                  const tpm::SealedBlob& sealed_pm_pub, const Nonce& nonce_prime);

}  // namespace tim::pal
