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

// The record exchanged between the proxy module and a PAL session through the
// Flicker input/output files.
//
// Encoding: "PENV" | u8 version (1) | u8 option | u8 status | u32 len | Fields.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tim/codec.hpp"
#include "tim/error.hpp"

namespace tim::pal {

enum class PalOption : std::uint8_t {
  unknown = 0,
  initial_sealing = 1,
  secure_tunnel = 2,
  data_extraction = 3,
  registration = 4,
  authentication = 5,
  credential_decryption = 6,
};

std::string_view option_name(PalOption option) noexcept;
bool is_known(PalOption option) noexcept;

enum class EnvelopeStatus : std::uint8_t { ok = 0, error = 1 };

namespace field {
inline constexpr std::string_view kPmPub = "pm_pub";
inline constexpr std::string_view kSealedPmPub = "sealed_pm_pub";
inline constexpr std::string_view kPalPub = "pal_pub";
inline constexpr std::string_view kSealedPalPriv = "sealed_pal_priv";
inline constexpr std::string_view kNonce = "nonce";
inline constexpr std::string_view kNoncePrime = "nonce_prime";
inline constexpr std::string_view kEncData = "enc_data";
inline constexpr std::string_view kSealedPassList = "sealed_pass_list";
inline constexpr std::string_view kOtpParams = "otp_params";
inline constexpr std::string_view kVerdict = "verdict";
inline constexpr std::string_view kReason = "reason";
inline constexpr std::string_view kEncCred = "enc_cred";
inline constexpr std::string_view kEncCredWithPm = "enc_cred_with_pm";
inline constexpr std::string_view kLength = "length";
inline constexpr std::string_view kError = "error";
inline constexpr std::string_view kStep = "step";
inline constexpr std::string_view kDetail = "detail";
// Inside encrypted payloads only.
inline constexpr std::string_view kUserId = "user_id";
inline constexpr std::string_view kMasterPassword = "master_password";
inline constexpr std::string_view kSecretPhrase = "secret_phrase";
inline constexpr std::string_view kPassword = "password";
inline constexpr std::string_view kKind = "kind";
inline constexpr std::string_view kCredentials = "credentials";
}  // namespace field

struct PalEnvelope {
  PalOption option = PalOption::unknown;
  EnvelopeStatus status = EnvelopeStatus::ok;
  Fields payload;

  static PalEnvelope request(PalOption option, Fields payload);
  static PalEnvelope failure(PalOption option, const TimError& error);

  bool ok() const noexcept { return status == EnvelopeStatus::ok; }
  // Rebuilds the TimError carried by an error envelope. Requires !ok().
  TimError error() const;

  Bytes encode() const;
  // Throws TimError(format_error). Unknown option values are preserved so the
  // PAL can answer them with an error envelope.
  static PalEnvelope decode(ByteView in);

  friend bool operator==(const PalEnvelope&, const PalEnvelope&) = default;
};

// Closed per-option field sets. A payload must contain every required field
// and nothing outside required + optional.
struct Schema {
  std::vector<std::string_view> required;
  std::vector<std::string_view> optional;
};

const Schema& input_schema(PalOption option);
const Schema& output_schema(PalOption option);
const Schema& error_schema();

// Throws TimError(schema_violation, ..., step).
void check_schema(const Fields& payload, const Schema& schema, std::string_view step);

}  // namespace tim::pal
