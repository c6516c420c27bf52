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

#include "tim/tpm/emulator.hpp"

#include "tim/codec.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"
#include "tim/file_io.hpp"

namespace tim::tpm {
namespace {

constexpr std::string_view kSealTag = "tim-seal/v1";
constexpr std::string_view kQuoteTag = "tim-quote/v1";
constexpr std::string_view kSnapshotMagic = "TIMS";
constexpr std::uint16_t kSnapshotVersion = 1;
constexpr std::string_view kAikSubjectPrefix = "aik:";

void check_index(std::size_t index) {
  if (index >= kPcrCount)
    throw TimError(Errc::usage, "PCR index " + std::to_string(index) + " out of range");
}

}  // namespace

Digest Sha1PcrTraits::extend(const Digest& old, const Digest& measurement) {
  return crypto::hash_concat({measurement.view(), old.view()});
}

// ---------------------------------------------------------------------------
// Wire formats

Bytes MeasurementLog::encode() const {
  Writer w;
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) w.str(e.label).fixed(e.measurement);
  return std::move(w).bytes();
}

MeasurementLog MeasurementLog::decode(ByteView in) {
  Reader r(in);
  std::uint32_t n = r.u32();
  if (n > r.remaining()) throw TimError(Errc::format_error, "measurement log count exceeds input");
  MeasurementLog log;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string label = r.str();
    log.entries.push_back({std::move(label), r.fixed<Digest>()});
  }
  r.expect_done("measurement log");
  return log;
}

Bytes SealedBlob::header() const {
  Writer w;
  w.raw(as_bytes(kSealTag)).fixed(owner).fixed(seal_id).u32(pcr_index).fixed(pcr_value_at_seal);
  return std::move(w).bytes();
}

Bytes SealedBlob::encode() const {
  Writer w;
  w.u8(1).fixed(owner).fixed(seal_id).u32(pcr_index).fixed(pcr_value_at_seal).blob(ciphertext);
  return std::move(w).bytes();
}

SealedBlob SealedBlob::decode(ByteView in) {
  Reader r(in);
  if (r.u8() != 1) throw TimError(Errc::format_error, "unsupported sealed blob version");
  SealedBlob b;
  b.owner = r.fixed<Digest>();
  b.seal_id = r.fixed<Nonce>();
  b.pcr_index = r.u32();
  b.pcr_value_at_seal = r.fixed<Digest>();
  ByteView ct = r.blob();
  b.ciphertext.assign(ct.begin(), ct.end());
  r.expect_done("sealed blob");
  return b;
}

Bytes Quote::signed_payload() const {
  Writer w;
  w.raw(as_bytes(kQuoteTag)).u32(pcr_index).fixed(pcr_value).fixed(nonce);
  return std::move(w).bytes();
}

Bytes Quote::encode() const {
  Writer w;
  w.u8(1).u32(pcr_index).fixed(pcr_value).fixed(nonce).blob(signature).blob(aik_cert.encode());
  return std::move(w).bytes();
}

Quote Quote::decode(ByteView in) {
  Reader r(in);
  if (r.u8() != 1) throw TimError(Errc::format_error, "unsupported quote version");
  Quote q;
  q.pcr_index = r.u32();
  q.pcr_value = r.fixed<Digest>();
  q.nonce = r.fixed<Nonce>();
  ByteView sig = r.blob();
  q.signature.assign(sig.begin(), sig.end());
  q.aik_cert = crypto::Certificate::decode(r.blob());
  r.expect_done("quote");
  return q;
}

std::string_view rejection_name(QuoteRejection r) noexcept {
  switch (r) {
    case QuoteRejection::none: return "none";
    case QuoteRejection::bad_aik_certificate: return "bad_aik_certificate";
    case QuoteRejection::bad_signature: return "bad_signature";
    case QuoteRejection::nonce_mismatch: return "nonce_mismatch";
    case QuoteRejection::log_mismatch: return "log_mismatch";
  }
  return "unknown";
}

QuoteVerdict verify_quote(const Quote& quote, const Nonce& expected_nonce,
                          const MeasurementLog& log, const crypto::PublicKey& ca_public) {
  if (!crypto::verify_certificate(quote.aik_cert, ca_public) ||
      !quote.aik_cert.subject.starts_with(kAikSubjectPrefix)) {
    return {QuoteRejection::bad_aik_certificate, "AIK certificate does not verify under the CA"};
  }
  if (!crypto::verify(quote.aik_cert.public_key, quote.signed_payload(), quote.signature))
    return {QuoteRejection::bad_signature, "quote signature invalid"};
  if (quote.nonce != expected_nonce)
    return {QuoteRejection::nonce_mismatch, "quote nonce is not the challenge nonce"};
  Digest replayed = log.replay();
  if (replayed != quote.pcr_value) {
    return {QuoteRejection::log_mismatch,
            "log replays to " + replayed.hex() + ", quote says " + quote.pcr_value.hex()};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Emulator

TpmEmulator::TpmEmulator(const crypto::CertificateAuthority& ca, std::uint64_t seed)
    : rng_(std::make_unique<crypto::Rng>(seed, "tpm")) {
  srk_ = rng_->secure_bytes(32);
  ek_ = crypto::generate_keypair(crypto::KeyPurpose::ek, *rng_);
  aik_ = crypto::generate_keypair(crypto::KeyPurpose::aik, *rng_);
  id_ = ek_.key_id();
  aik_cert_ = ca.issue(std::string(kAikSubjectPrefix) + id_.hex(), aik_.public_key());
}

TpmEmulator::TpmEmulator(std::uint64_t seed, ByteView srk, const crypto::KeyPair& ek,
                         const crypto::KeyPair& aik, crypto::Certificate aik_cert)
    : rng_(std::make_unique<crypto::Rng>(seed, "tpm")),
      srk_(to_secure(srk)),
      ek_(ek),
      aik_(aik),
      aik_cert_(std::move(aik_cert)),
      id_(ek.key_id()) {}

Bytes TpmEmulator::snapshot() const {
  std::lock_guard lock(mu_);
  Writer w;
  w.raw(as_bytes(kSnapshotMagic)).u16(kSnapshotVersion);
  w.blob(srk_);
  SecureBytes ek = ek_.encode_private();
  SecureBytes aik = aik_.encode_private();
  w.blob(ek).blob(aik).blob(aik_cert_.encode());
  w.u32(static_cast<std::uint32_t>(kPcrCount));
  for (std::size_t i = 0; i < kPcrCount; ++i) {
    w.fixed(pcrs_.read(i));
    w.blob(MeasurementLog{pcrs_.log(i)}.encode());
  }
  return std::move(w).bytes();
}

std::unique_ptr<TpmEmulator> TpmEmulator::restore(ByteView snapshot, std::uint64_t seed) {
  Reader r(snapshot);
  if (to_string(r.raw(kSnapshotMagic.size())) != kSnapshotMagic)
    throw TimError(Errc::format_error, "not a TPM snapshot");
  if (r.u16() != kSnapshotVersion) throw TimError(Errc::format_error, "unsupported snapshot version");
  ByteView srk = r.blob();
  if (srk.size() != 32) throw TimError(Errc::format_error, "bad storage root key");
  crypto::KeyPair ek = crypto::KeyPair::decode_private(r.blob());
  crypto::KeyPair aik = crypto::KeyPair::decode_private(r.blob());
  crypto::Certificate cert = crypto::Certificate::decode(r.blob());
  if (cert.public_key != aik.public_key())
    throw TimError(Errc::format_error, "AIK certificate does not match AIK");
  if (r.u32() != kPcrCount) throw TimError(Errc::format_error, "unexpected PCR count");
  std::array<Digest, kPcrCount> values{};
  std::array<std::vector<MeasurementEntry>, kPcrCount> logs;
  for (std::size_t i = 0; i < kPcrCount; ++i) {
    values[i] = r.fixed<Digest>();
    logs[i] = MeasurementLog::decode(r.blob()).entries;
  }
  r.expect_done("snapshot");

  std::unique_ptr<TpmEmulator> tpm(new TpmEmulator(seed, srk, ek, aik, std::move(cert)));
  tpm->pcrs_.restore(values, logs);
  return tpm;
}

void TpmEmulator::save(const std::filesystem::path& path) const { write_file_atomic(path, snapshot()); }

std::unique_ptr<TpmEmulator> TpmEmulator::load(const std::filesystem::path& path,
                                               std::uint64_t seed) {
  return restore(read_file(path), seed);
}

void TpmEmulator::notify(const PcrEvent& e) const {
  if (observer_) observer_(e);
}

Digest TpmEmulator::extend(std::size_t pcr_index, std::string label, const Digest& measurement) {
  std::lock_guard lock(mu_);
  check_index(pcr_index);
  std::string l = label;
  Digest v = pcrs_.extend(pcr_index, std::move(label), measurement);
  notify({PcrEvent::Kind::extend, static_cast<std::uint32_t>(pcr_index), std::move(l), measurement, v});
  return v;
}

Digest TpmEmulator::read_pcr(std::size_t pcr_index) const {
  std::lock_guard lock(mu_);
  return pcrs_.read(pcr_index);
}

MeasurementLog TpmEmulator::measurement_log(std::size_t pcr_index) const {
  std::lock_guard lock(mu_);
  return MeasurementLog{pcrs_.log(pcr_index)};
}

Digest TpmEmulator::drtm_launch(ByteView pal_image) {
  Digest measurement = crypto::hash(pal_image);
  std::lock_guard lock(mu_);
  if (drtm_open_) {
    ++violations_;
    throw TimError(Errc::exclusivity, "a late-launch session is already active");
  }
  drtm_open_ = true;
  ++launches_;
  pcrs_.reset_dynamic(kDrtmPcr);
  notify({PcrEvent::Kind::drtm_reset, static_cast<std::uint32_t>(kDrtmPcr), "drtm", Digest{}, Digest{}});
  Digest v = pcrs_.extend(kDrtmPcr, "pal", measurement);
  notify({PcrEvent::Kind::extend, static_cast<std::uint32_t>(kDrtmPcr), "pal", measurement, v});
  return v;
}

void TpmEmulator::drtm_close() {
  std::lock_guard lock(mu_);
  drtm_open_ = false;
}

bool TpmEmulator::drtm_active() const {
  std::lock_guard lock(mu_);
  return drtm_open_;
}

SealedBlob TpmEmulator::seal(ByteView plaintext, std::size_t pcr_index) {
  std::lock_guard lock(mu_);
  check_index(pcr_index);
  SealedBlob blob;
  blob.owner = id_;
  blob.seal_id = rng_->nonce();
  blob.pcr_index = static_cast<std::uint32_t>(pcr_index);
  blob.pcr_value_at_seal = pcrs_.read(pcr_index);
  blob.ciphertext = crypto::aead_seal(srk_, blob.header(), plaintext, *rng_);
  return blob;
}

SecureBytes TpmEmulator::unseal(const SealedBlob& blob) const {
  std::lock_guard lock(mu_);
  if (blob.owner != id_) throw TimError(Errc::unknown_blob, "blob was not sealed by this TPM");
  check_index(blob.pcr_index);
  if (pcrs_.read(blob.pcr_index) != blob.pcr_value_at_seal) {
    throw TimError(Errc::seal_violation,
                   "PCR" + std::to_string(blob.pcr_index) + " differs from the sealed value");
  }
  try {
    return crypto::aead_open(srk_, blob.header(), blob.ciphertext);
  } catch (const TimError& e) {
    throw TimError(Errc::integrity_failure, std::string("sealed blob corrupted: ") + e.what());
  }
}

Quote TpmEmulator::quote(std::size_t pcr_index, const Nonce& nonce) const {
  std::lock_guard lock(mu_);
  check_index(pcr_index);
  Quote q;
  q.pcr_index = static_cast<std::uint32_t>(pcr_index);
  q.pcr_value = pcrs_.read(pcr_index);
  q.nonce = nonce;
  q.signature = crypto::sign(aik_, q.signed_payload());
  q.aik_cert = aik_cert_;
  return q;
}

void TpmEmulator::power_cycle() {
  std::lock_guard lock(mu_);
  pcrs_.power_on();
  drtm_open_ = false;
  notify({PcrEvent::Kind::power_on, 0, "power-on", Digest{}, Digest{}});
}

void TpmEmulator::set_observer(std::function<void(const PcrEvent&)> observer) {
  std::lock_guard lock(mu_);
  observer_ = std::move(observer);
}

std::uint64_t TpmEmulator::drtm_launches() const {
  std::lock_guard lock(mu_);
  return launches_;
}

std::uint64_t TpmEmulator::exclusivity_violations() const {
  std::lock_guard lock(mu_);
  return violations_;
}

}  // namespace tim::tpm
