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
#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::tpm {
namespace {

using testing::OracleSha1;

class TpmTest : public ::testing::Test {
 protected:
  crypto::Rng ca_rng{1, "ca"};
  crypto::CertificateAuthority ca{ca_rng};
  TpmEmulator tpm{ca, 1};
  Nonce nonce = Nonce::from(Bytes(20, 0x42));
};

TEST_F(TpmTest, ExtendMatchesOracleFold) {
  crypto::Rng rng(2, "m");
  OracleSha1::Digest expect{};
  for (int i = 0; i < 50; ++i) {
    Digest m = Digest::from(rng.bytes(20));
    Digest got = tpm.extend(10, "m" + std::to_string(i), m);
    expect = OracleSha1::extend(expect, m.array());
    ASSERT_EQ(got, testing::to_digest(expect));
  }
  EXPECT_EQ(tpm.read_pcr(10), testing::to_digest(expect));
  EXPECT_EQ(tpm.measurement_log(10).entries.size(), 50u);
  EXPECT_EQ(tpm.measurement_log(10).replay(), tpm.read_pcr(10));
}

TEST_F(TpmTest, ExtendOperandOrderIsMeasurementThenOld) {
  Digest m = crypto::hash("x");
  EXPECT_EQ(tpm.extend(15, "k", m).hex(), "f15bdb9567611baf39bc02da3daaa348b14785a4");
}

TEST_F(TpmTest, IndexOutOfRange) {
  EXPECT_TIM_ERROR(tpm.extend(kPcrCount, "x", Digest{}), Errc::usage);
  EXPECT_TIM_ERROR(tpm.read_pcr(99), Errc::usage);
}

TEST_F(TpmTest, LateLaunchResetsOnlyPcr18) {
  tpm.extend(15, "pm", crypto::hash("pm"));
  tpm.extend(18, "junk", crypto::hash("junk"));
  Digest pcr15 = tpm.read_pcr(15);
  Digest v = tpm.drtm_launch(as_bytes("pal-image"));
  EXPECT_EQ(v, testing::to_digest(OracleSha1::extend({}, OracleSha1::of(std::string_view("pal-image")))));
  EXPECT_EQ(tpm.measurement_log(18).entries.size(), 1u);
  EXPECT_EQ(tpm.read_pcr(15), pcr15);
  tpm.drtm_close();
}

TEST_F(TpmTest, LateLaunchIsExclusive) {
  tpm.drtm_launch(as_bytes("pal"));
  EXPECT_TIM_ERROR(tpm.drtm_launch(as_bytes("pal")), Errc::exclusivity);
  EXPECT_EQ(tpm.exclusivity_violations(), 1u);
  tpm.drtm_close();
  tpm.drtm_launch(as_bytes("pal"));
  tpm.drtm_close();
  EXPECT_EQ(tpm.drtm_launches(), 2u);
}

TEST_F(TpmTest, PowerCycleClearsEverything) {
  tpm.extend(3, "a", crypto::hash("a"));
  tpm.drtm_launch(as_bytes("pal"));
  tpm.power_cycle();
  EXPECT_TRUE(tpm.read_pcr(3).is_zero());
  EXPECT_TRUE(tpm.read_pcr(18).is_zero());
  EXPECT_FALSE(tpm.drtm_active());
}

TEST_F(TpmTest, UnsealNeedsTheSealTimeValue) {
  tpm.extend(18, "a", crypto::hash("a"));
  SealedBlob blob = tpm.seal(as_bytes("secret"), 18);
  EXPECT_EQ(to_string(tpm.unseal(blob)), "secret");
  tpm.extend(18, "b", crypto::hash("b"));
  EXPECT_TIM_ERROR(tpm.unseal(blob), Errc::seal_violation);
}

TEST_F(TpmTest, SealedPlaintextIsNotInTheBlob) {
  SealedBlob blob = tpm.seal(as_bytes("plaintext-marker"), 18);
  EXPECT_FALSE(contains_subsequence(blob.encode(), as_bytes("plaintext-marker")));
  EXPECT_EQ(SealedBlob::decode(blob.encode()), blob);
}

TEST_F(TpmTest, BlobFromAnotherTpmIsUnknown) {
  TpmEmulator other(ca, 2);
  SealedBlob blob = other.seal(as_bytes("x"), 18);
  EXPECT_TIM_ERROR(tpm.unseal(blob), Errc::unknown_blob);
}

TEST_F(TpmTest, TamperedBlobFailsIntegrity) {
  SealedBlob blob = tpm.seal(as_bytes("x"), 18);
  SealedBlob ct = blob;
  ct.ciphertext[ct.ciphertext.size() / 2] ^= 1;
  EXPECT_TIM_ERROR(tpm.unseal(ct), Errc::integrity_failure);
  // Relabelling the blob with another PCR value that happens to be current
  // still fails: the header is authenticated.
  tpm.extend(18, "a", crypto::hash("a"));
  SealedBlob moved = blob;
  moved.pcr_value_at_seal = tpm.read_pcr(18);
  EXPECT_TIM_ERROR(tpm.unseal(moved), Errc::integrity_failure);
  SealedBlob reindexed = blob;
  reindexed.pcr_index = 17;
  EXPECT_TIM_ERROR(tpm.unseal(reindexed), Errc::integrity_failure);
}

TEST_F(TpmTest, HonestQuoteVerifies) {
  tpm.drtm_launch(as_bytes("pal"));
  tpm.extend(18, "flicker", crypto::hash("f"));
  Quote q = tpm.quote(18, nonce);
  MeasurementLog log = tpm.measurement_log(18);
  tpm.drtm_close();
  EXPECT_TRUE(verify_quote(q, nonce, log, ca.public_key()).ok());
  EXPECT_EQ(Quote::decode(q.encode()), q);
  EXPECT_EQ(MeasurementLog::decode(log.encode()), log);
}

TEST_F(TpmTest, QuoteRejectionReasons) {
  tpm.drtm_launch(as_bytes("pal"));
  tpm.extend(18, "flicker", crypto::hash("f"));
  Quote q = tpm.quote(18, nonce);
  MeasurementLog log = tpm.measurement_log(18);
  tpm.drtm_close();

  MeasurementLog bad_log = log;
  bad_log.entries[1].measurement[0] ^= 1;
  EXPECT_EQ(verify_quote(q, nonce, bad_log, ca.public_key()).reason, QuoteRejection::log_mismatch);

  Quote bad_sig = q;
  bad_sig.signature[5] ^= 1;
  EXPECT_EQ(verify_quote(bad_sig, nonce, log, ca.public_key()).reason, QuoteRejection::bad_signature);

  Nonce stale = Nonce::from(Bytes(20, 0x41));
  EXPECT_EQ(verify_quote(q, stale, log, ca.public_key()).reason, QuoteRejection::nonce_mismatch);

  crypto::Rng rogue_rng(3, "rogue");
  crypto::CertificateAuthority rogue(rogue_rng);
  EXPECT_EQ(verify_quote(q, nonce, log, rogue.public_key()).reason, QuoteRejection::bad_aik_certificate);

  Quote relabelled = q;
  relabelled.pcr_value[0] ^= 1;
  EXPECT_EQ(verify_quote(relabelled, nonce, log, ca.public_key()).reason, QuoteRejection::bad_signature);
}

TEST_F(TpmTest, NonAikCertificateIsRejected) {
  Quote q = tpm.quote(18, nonce);
  crypto::Rng rng(4, "x");
  auto key = crypto::generate_keypair(crypto::KeyPurpose::site, rng);
  q.aik_cert = ca.issue("site:shop", key.public_key());
  q.signature = crypto::sign(key, q.signed_payload());
  EXPECT_EQ(verify_quote(q, nonce, tpm.measurement_log(18), ca.public_key()).reason,
            QuoteRejection::bad_aik_certificate);
}

TEST_F(TpmTest, SnapshotRoundTripKeepsSealedDataUsable) {
  tpm.extend(18, "a", crypto::hash("a"));
  SealedBlob blob = tpm.seal(as_bytes("kept"), 18);
  testing::TempDir dir;
  tpm.save(dir / "tpm.snap");
  auto back = TpmEmulator::load(dir / "tpm.snap", 99);
  EXPECT_EQ(back->read_pcr(18), tpm.read_pcr(18));
  EXPECT_EQ(back->measurement_log(18), tpm.measurement_log(18));
  EXPECT_EQ(back->id(), tpm.id());
  EXPECT_EQ(to_string(back->unseal(blob)), "kept");
  EXPECT_EQ(back->snapshot(), tpm.snapshot());
}

TEST_F(TpmTest, SnapshotWithInconsistentRegisterIsRejected) {
  tpm.extend(4, "a", crypto::hash("a"));
  Bytes snap = tpm.snapshot();
  Digest v = tpm.read_pcr(4);
  // Flip one byte of the stored register value wherever it appears.
  auto it = std::search(snap.begin(), snap.end(), v.array().begin(), v.array().end());
  ASSERT_NE(it, snap.end());
  *it ^= 1;
  EXPECT_TIM_ERROR(TpmEmulator::restore(snap, 1), Errc::format_error);
  EXPECT_TIM_ERROR(TpmEmulator::restore(Bytes{1, 2, 3}, 1), Errc::format_error);
}

TEST_F(TpmTest, ObserverSeesEveryRegisterChange) {
  std::vector<PcrEvent> events;
  tpm.set_observer([&](const PcrEvent& e) { events.push_back(e); });
  tpm.drtm_launch(as_bytes("pal"));
  tpm.extend(18, "x", crypto::hash("x"));
  tpm.drtm_close();
  tpm.power_cycle();
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(events[0].kind, PcrEvent::Kind::drtm_reset);
  EXPECT_EQ(events[1].label, "pal");
  EXPECT_EQ(events[2].new_value, events[2].new_value);
  EXPECT_EQ(events[3].kind, PcrEvent::Kind::power_on);
}

}  // namespace
}  // namespace tim::tpm
