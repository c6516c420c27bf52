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
#include "tim/pal/pal.hpp"

#include "tim/codec.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"
#include "tim/file_io.hpp"
#include "tim/pal/blocks.hpp"
#include "tim/pal/envelope.hpp"

namespace tim::pal {
namespace {

using namespace field;

tpm::SealedBlob blob_field(const Fields& in, std::string_view name, std::string_view step) {
  try {
    return tpm::SealedBlob::decode(in.get(name));
  } catch (const TimError& e) {
    throw TimError(e.code(), "field '" + std::string(name) + "': " + e.what(), std::string(step));
  }
}

Nonce nonce_field(const Fields& in, std::string_view name, std::string_view step) {
  try {
    return in.get_fixed<Nonce>(name);
  } catch (const TimError& e) {
    throw TimError(Errc::format_error, "field '" + std::string(name) + "': " + e.what(), std::string(step));
  }
}

// Decrypted sensitive data of a secure-tunnel message, schema-checked.
Fields extract(tpm::TpmEmulator& tpm, const Fields& in, const Schema& schema, std::string_view step) {
  SecureBytes plain =
      block_data_extraction(tpm, in.get(kEncData), blob_field(in, kSealedPalPriv, step), nonce_field(in, kNonce, step));
  Fields sen;
  try {
    sen = Fields::decode(plain);
  } catch (const TimError& e) {
    throw TimError(Errc::format_error, e.what(), std::string(step));
  }
  try {
    check_schema(sen, schema, step);
  } catch (...) {
    sen.clear();
    throw;
  }
  return sen;
}

Fields dispatch(tpm::TpmEmulator& tpm, PalOption option, const Fields& in) {
  Fields out;
  switch (option) {
    case PalOption::initial_sealing: {
      crypto::PublicKey pm_pub;
      try {
        pm_pub = crypto::PublicKey::decode(in.get(kPmPub));
      } catch (const TimError& e) {
        throw TimError(e.code(), e.what(), "initial-sealing.3a");
      }
      out.set(std::string(kSealedPmPub), block_initial_sealing(tpm, pm_pub).encode());
      break;
    }
    case PalOption::secure_tunnel: {
      TunnelArtifacts t = block_secure_tunnel(tpm);
      out.set(std::string(kPalPub), t.pal_pub.encode());
      out.set(std::string(kSealedPalPriv), t.sealed_pal_priv.encode());
      out.set(std::string(kNonce), t.nonce);
      break;
    }
    case PalOption::data_extraction: {
      SecureBytes plain = block_data_extraction(tpm, in.get(kEncData), blob_field(in, kSealedPalPriv, "secure-tunnel.10a"),
                                                nonce_field(in, kNonce, "secure-tunnel.10b"));
      Writer w;
      w.u32(static_cast<std::uint32_t>(plain.size()));
      out.set(std::string(kLength), w.bytes());
      break;
    }
    case PalOption::registration: {
      static const Schema kSen{{kUserId, kMasterPassword, kSecretPhrase}, {}};
      std::optional<tpm::SealedBlob> list;
      if (in.has(kSealedPassList)) list = blob_field(in, kSealedPassList, "registration.4b");
      Fields sen = extract(tpm, in, kSen, "registration.3b");
      RegistrationResult r;
      try {
        r = block_registration(tpm, list, sen.get_string(kUserId), sen.get_string(kMasterPassword),
                               sen.get_string(kSecretPhrase));
      } catch (...) {
        sen.clear();
        throw;
      }
      sen.clear();
      out.set(std::string(kOtpParams), r.otp_params.to_line());
      out.set(std::string(kSealedPassList), r.sealed_pass_list.encode());
      break;
    }
    case PalOption::authentication: {
      static const Schema kSen{{kUserId, kPassword, kKind}, {}};
      tpm::SealedBlob list = blob_field(in, kSealedPassList, "authentication.4a");
      Fields sen = extract(tpm, in, kSen, "authentication.3c");
      auto kind = kind_from_name(sen.get_string(kKind));
      if (!kind) {
        sen.clear();
        throw TimError(Errc::schema_violation, "unknown password kind", "authentication.3c");
      }
      // The proxy opens the session for the user id it sent in the clear; a
      // tunnel payload for anyone else must not verify.
      const bool same_user = sen.get_string(kUserId) == in.get_string(kUserId);
      AuthenticationResult r;
      try {
        r = block_authentication(tpm, list, in.get_string(kUserId),
                                 same_user ? sen.get_string(kPassword) : std::string(), *kind);
      } catch (...) {
        sen.clear();
        throw;
      }
      sen.clear();
      const std::uint8_t verdict = r.verdict ? kVerdictAccept : kVerdictReject;
      out.set(std::string(kVerdict), ByteView(&verdict, 1));
      if (r.sealed_pass_list) out.set(std::string(kSealedPassList), r.sealed_pass_list->encode());
      if (!r.reason.empty()) out.set(std::string(kReason), r.reason);
      break;
    }
    case PalOption::credential_decryption: {
      Bytes enc = block_credential_decryption(
          tpm, in.get(kEncCred), blob_field(in, kSealedPalPriv, "credential-decryption.3b"),
          nonce_field(in, kNonce, "credential-decryption.3c"), blob_field(in, kSealedPmPub, "credential-decryption.3a"),
          nonce_field(in, kNoncePrime, "credential-decryption.3e"));
      out.set(std::string(kEncCredWithPm), enc);
      break;
    }
    case PalOption::unknown:
      break;
  }
  return out;
}

}  // namespace

Bytes run_pal(tpm::TpmEmulator& tpm, const LiveModules& modules, ByteView input) {
  // Phase 1: measurements. Runs before anything in the input is looked at.
  tpm.extend(tpm::kDrtmPcr, "flicker", crypto::hash(modules.flicker));
  tpm.extend(tpm::kDrtmPcr, "proxy", crypto::hash(modules.proxy));

  PalOption option = PalOption::unknown;
  try {
    // Phase 2: input.
    PalEnvelope request;
    try {
      request = PalEnvelope::decode(input);
    } catch (const TimError& e) {
      throw TimError(e.code(), e.what(), "pal.input");
    }
    option = request.option;
    if (!is_known(option))
      throw TimError(Errc::schema_violation, "unknown PAL option " + std::to_string(static_cast<int>(option)), "pal.input");
    if (!request.ok()) throw TimError(Errc::schema_violation, "input envelope is marked as an error", "pal.input");
    check_schema(request.payload, input_schema(option), "pal.input");

    // Phase 3: the block.
    Fields out = dispatch(tpm, option, request.payload);

    // Phase 4: output.
    check_schema(out, output_schema(option), "pal.output");
    return PalEnvelope{option, EnvelopeStatus::ok, std::move(out)}.encode();
  } catch (const TimError& e) {
    return PalEnvelope::failure(option, e).encode();
  } catch (const std::exception& e) {
    return PalEnvelope::failure(option, TimError(Errc::protocol_violation, e.what(), "pal")).encode();
  }
}

void run_pal_files(tpm::TpmEmulator& tpm, const LiveModules& modules, const std::filesystem::path& input,
                   const std::filesystem::path& output) {
  // An unreadable input file still goes through phase 1 and yields an error
  // envelope.
  Bytes in;
  try {
    in = read_file(input);
  } catch (const TimError&) {
  }
  Bytes out = run_pal(tpm, modules, in);
  write_file_atomic(output, out);
}

}  // namespace tim::pal
