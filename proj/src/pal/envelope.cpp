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
#include "tim/pal/envelope.hpp"

#include <algorithm>
#include <array>

namespace tim::pal {
namespace {

constexpr std::string_view kMagic = "PENV";
constexpr std::uint8_t kVersion = 1;

using namespace field;

const std::array<Schema, 7> kInputSchemas = {{
    {{}, {}},
    {{kPmPub}, {}},
    {{}, {}},
    {{kEncData, kSealedPalPriv, kNonce}, {}},
    {{kEncData, kSealedPalPriv, kNonce}, {kSealedPassList}},
    {{kEncData, kSealedPalPriv, kNonce, kSealedPassList, kUserId}, {}},
    {{kEncCred, kSealedPalPriv, kNonce, kSealedPmPub, kNoncePrime}, {}},
}};

const std::array<Schema, 7> kOutputSchemas = {{
    {{}, {}},
    {{kSealedPmPub}, {}},
    {{kPalPub, kSealedPalPriv, kNonce}, {}},
    {{kLength}, {}},
    {{kOtpParams, kSealedPassList}, {}},
    {{kVerdict}, {kSealedPassList, kReason}},
    {{kEncCredWithPm}, {}},
}};

const Schema kErrorSchema = {{kError, kStep, kDetail}, {}};

}  // namespace

std::string_view option_name(PalOption option) noexcept {
  switch (option) {
    case PalOption::unknown: return "unknown";
    case PalOption::initial_sealing: return "initial_sealing";
    case PalOption::secure_tunnel: return "secure_tunnel";
    case PalOption::data_extraction: return "data_extraction";
    case PalOption::registration: return "registration";
    case PalOption::authentication: return "authentication";
    case PalOption::credential_decryption: return "credential_decryption";
  }
  return "unknown";
}

bool is_known(PalOption option) noexcept {
  auto v = static_cast<std::uint8_t>(option);
  return v >= 1 && v <= 6;
}

PalEnvelope PalEnvelope::request(PalOption option, Fields payload) {
  return {option, EnvelopeStatus::ok, std::move(payload)};
}

PalEnvelope PalEnvelope::failure(PalOption option, const TimError& error) {
  Fields f;
  f.set(std::string(kError), errc_name(error.code()));
  f.set(std::string(kStep), error.step());
  f.set(std::string(kDetail), std::string_view(error.what()));
  return {option, EnvelopeStatus::error, std::move(f)};
}

TimError PalEnvelope::error() const {
  std::string name = payload.has(kError) ? payload.get_string(kError) : "";
  auto code = errc_from_name(name);
  std::string step = payload.has(kStep) ? payload.get_string(kStep) : "";
  std::string detail = payload.has(kDetail) ? payload.get_string(kDetail) : "PAL reported an error";
  return TimError(code.value_or(Errc::protocol_violation), detail, step);
}

Bytes PalEnvelope::encode() const {
  Writer w;
  w.raw(as_bytes(kMagic))
      .u8(kVersion)
      .u8(static_cast<std::uint8_t>(option))
      .u8(static_cast<std::uint8_t>(status))
      .blob(payload.encode());
  return std::move(w).bytes();
}

PalEnvelope PalEnvelope::decode(ByteView in) {
  Reader r(in);
  if (to_string(r.raw(kMagic.size())) != kMagic) throw TimError(Errc::format_error, "not a PAL envelope");
  if (r.u8() != kVersion) throw TimError(Errc::format_error, "unsupported envelope version");
  PalEnvelope env;
  env.option = static_cast<PalOption>(r.u8());
  std::uint8_t status = r.u8();
  if (status > 1) throw TimError(Errc::format_error, "bad envelope status");
  env.status = static_cast<EnvelopeStatus>(status);
  env.payload = Fields::decode(r.blob());
  r.expect_done("PAL envelope");
  return env;
}

const Schema& input_schema(PalOption option) {
  return kInputSchemas[is_known(option) ? static_cast<std::size_t>(option) : 0];
}

const Schema& output_schema(PalOption option) {
  return kOutputSchemas[is_known(option) ? static_cast<std::size_t>(option) : 0];
}

const Schema& error_schema() { return kErrorSchema; }

void check_schema(const Fields& payload, const Schema& schema, std::string_view step) {
  for (auto name : schema.required) {
    if (!payload.has(name))
      throw TimError(Errc::schema_violation, "missing field '" + std::string(name) + "'", std::string(step));
  }
  for (const auto& [name, value] : payload) {
    auto known = [&](const std::vector<std::string_view>& names) {
      return std::find(names.begin(), names.end(), name) != names.end();
    };
    if (!known(schema.required) && !known(schema.optional))
      throw TimError(Errc::schema_violation, "unexpected field '" + name + "'", std::string(step));
  }
}

}  // namespace tim::pal
