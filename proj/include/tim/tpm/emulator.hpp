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

// Software TPM 1.2 subset: PCR extend, late-launch (DRTM) reset of PCR18,
// seal/unseal bound to one PCR, and AIK quotes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tim/bytes.hpp"
#include "tim/crypto/certificate.hpp"
#include "tim/crypto/keys.hpp"
#include "tim/crypto/rng.hpp"
#include "tim/tpm/pcr_bank.hpp"

namespace tim::tpm {

inline constexpr std::size_t kPcrCount = 24;
// Reset by late launch; holds the PAL/Flicker/proxy chain.
inline constexpr std::size_t kDrtmPcr = 18;
// Extended once at boot with the proxy module's public key.
inline constexpr std::size_t kProxyKeyPcr = 15;

struct Sha1PcrTraits {
  using value_type = Digest;
  static constexpr std::size_t kCount = kPcrCount;
  static Digest initial() { return Digest{}; }
  // hash(measurement || old). Operand order follows the measured-chain
  // formula H(H(PM) || H(H(Flicker) || H(H(PAL) || 0^20))).
  static Digest extend(const Digest& old, const Digest& measurement);
  static bool dynamic(std::size_t index) { return index == kDrtmPcr; }
};

using PcrBank = BasicPcrBank<Sha1PcrTraits>;
using MeasurementEntry = PcrBank::LogEntry;

// Stored measurement log for one PCR.
struct MeasurementLog {
  std::vector<MeasurementEntry> entries;

  // Extend fold from the all-zero digest.
  Digest replay() const { return PcrBank::replay(entries); }

  // u32 count, then per entry: str label, 20 digest.
  Bytes encode() const;
  static MeasurementLog decode(ByteView in);

  friend bool operator==(const MeasurementLog&, const MeasurementLog&) = default;
};

struct SealedBlob {
  Digest owner;  // id of the sealing TPM (its EK key id)
  Nonce seal_id;
  std::uint32_t pcr_index = 0;
  Digest pcr_value_at_seal;
  Bytes ciphertext;

  // Authenticated header: "tim-seal/v1" || owner || seal_id || u32 index || value.
  Bytes header() const;
  Bytes encode() const;
  static SealedBlob decode(ByteView in);

  friend bool operator==(const SealedBlob&, const SealedBlob&) = default;
};

struct Quote {
  std::uint32_t pcr_index = 0;
  Digest pcr_value;
  Nonce nonce;
  Bytes signature;
  crypto::Certificate aik_cert;

  // Signed bytes: "tim-quote/v1" || u32 index || 20 value || 20 nonce.
  Bytes signed_payload() const;
  Bytes encode() const;
  static Quote decode(ByteView in);

  friend bool operator==(const Quote&, const Quote&) = default;
};

enum class QuoteRejection {
  none,
  bad_aik_certificate,
  bad_signature,
  nonce_mismatch,
  log_mismatch,
};

std::string_view rejection_name(QuoteRejection r) noexcept;

struct QuoteVerdict {
  QuoteRejection reason = QuoteRejection::none;
  std::string detail;

  bool ok() const noexcept { return reason == QuoteRejection::none; }
  explicit operator bool() const noexcept { return ok(); }
};

// Verifier side. Checks, in order: the AIK certificate chains to `ca_public`
// and names an AIK; the signature; the nonce; and that replaying `log` from
// the all-zero digest yields the quoted PCR value. Touches no TPM state.
QuoteVerdict verify_quote(const Quote& quote, const Nonce& expected_nonce,
                          const MeasurementLog& log, const crypto::PublicKey& ca_public);

struct PcrEvent {
  enum class Kind { extend, drtm_reset, power_on };
  Kind kind = Kind::extend;
  std::uint32_t pcr_index = 0;
  std::string label;
  Digest measurement;
  Digest new_value;
};

class TpmEmulator {
 public:
  // Generates the storage root key, EK and AIK from `seed`; the AIK
  // certificate is issued by `ca`.
  TpmEmulator(const crypto::CertificateAuthority& ca, std::uint64_t seed);

  TpmEmulator(const TpmEmulator&) = delete;
  TpmEmulator& operator=(const TpmEmulator&) = delete;

  // Versioned snapshot of SRK, EK, AIK and the PCR bank with its logs.
  Bytes snapshot() const;
  static std::unique_ptr<TpmEmulator> restore(ByteView snapshot, std::uint64_t seed);
  void save(const std::filesystem::path& path) const;
  static std::unique_ptr<TpmEmulator> load(const std::filesystem::path& path, std::uint64_t seed);

  Digest extend(std::size_t pcr_index, std::string label, const Digest& measurement);
  Digest read_pcr(std::size_t pcr_index) const;
  MeasurementLog measurement_log(std::size_t pcr_index) const;

  // Resets PCR18, extends it with hash(pal_image) and opens the exclusive
  // late-launch session. Throws TimError(exclusivity) if one is already open.
  Digest drtm_launch(ByteView pal_image);
  void drtm_close();
  bool drtm_active() const;

  SealedBlob seal(ByteView plaintext, std::size_t pcr_index);
  // Throws unknown_blob (sealed elsewhere), seal_violation (PCR moved) or
  // integrity_failure (tampered blob).
  SecureBytes unseal(const SealedBlob& blob) const;

  Quote quote(std::size_t pcr_index, const Nonce& nonce) const;

  // TPM_GetRandom.
  crypto::Rng& rng() const { return *rng_; }

  const Digest& id() const noexcept { return id_; }
  const crypto::Certificate& aik_certificate() const noexcept { return aik_cert_; }

  // Platform reset: every PCR back to zero, logs cleared, session closed.
  void power_cycle();

  void set_observer(std::function<void(const PcrEvent&)> observer);

  std::uint64_t drtm_launches() const;
  std::uint64_t exclusivity_violations() const;

 private:
  TpmEmulator(std::uint64_t seed, ByteView srk, const crypto::KeyPair& ek, const crypto::KeyPair& aik,
              crypto::Certificate aik_cert);
  void notify(const PcrEvent& e) const;

  mutable std::mutex mu_;
  std::unique_ptr<crypto::Rng> rng_;
  SecureBytes srk_;
  crypto::KeyPair ek_;
  crypto::KeyPair aik_;
  crypto::Certificate aik_cert_;
  Digest id_;
  PcrBank pcrs_;
  bool drtm_open_ = false;
  std::uint64_t launches_ = 0;
  std::uint64_t violations_ = 0;
  std::function<void(const PcrEvent&)> observer_;
};

}  // namespace tim::tpm
