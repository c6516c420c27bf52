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
#include "tim/file_io.hpp"
#include "tim/otp/otp.hpp"
#include "tim/pal/blocks.hpp"
#include "tim/pal/envelope.hpp"
#include "tim/pal/image.hpp"
#include "tim/pal/pal.hpp"
#include "tim/pal/pass_list.hpp"

namespace tim::pal {
namespace {

using namespace field;

class PalTest : public ::testing::Test {
 protected:
  void SetUp() override {
    pm_ = std::make_unique<crypto::KeyPair>(crypto::generate_keypair(crypto::KeyPurpose::proxy, rng_));
    tpm_.extend(tpm::kProxyKeyPcr, "pm-pub", crypto::hash(pm_->public_key().encode()));
  }

  // One late-launch session with the release images unless overridden.
  PalEnvelope run(PalOption option, Fields payload) { return run_raw(PalEnvelope::request(option, std::move(payload)).encode()); }

  PalEnvelope run_raw(ByteView input) {
    tpm_.drtm_launch(pal_image_);
    Bytes out = run_pal(tpm_, {flicker_, proxy_}, input);
    tpm_.drtm_close();
    return PalEnvelope::decode(out);
  }

  Bytes sealed_pm_pub() {
    Fields in;
    in.set(std::string(kPmPub), pm_->public_key().encode());
    PalEnvelope out = run(PalOption::initial_sealing, in);
    EXPECT_TRUE(out.ok()) << out.error().what();
    return out.payload.get(kSealedPmPub);
  }

  struct Tunnel {
    crypto::PublicKey pal_pub;
    Bytes sealed;
    Nonce nonce;
  };

  Tunnel tunnel() {
    PalEnvelope out = run(PalOption::secure_tunnel, {});
    EXPECT_TRUE(out.ok());
    return {crypto::PublicKey::decode(out.payload.get(kPalPub)), out.payload.get(kSealedPalPriv),
            out.payload.get_fixed<Nonce>(kNonce)};
  }

  Fields through(const Tunnel& t, const Fields& sensitive) {
    Fields in;
    in.set(std::string(kEncData), crypto::encrypt(t.pal_pub, sensitive.encode(), rng_));
    in.set(std::string(kSealedPalPriv), t.sealed);
    in.set(std::string(kNonce), t.nonce);
    return in;
  }

  PalEnvelope register_user(const std::string& user, const std::optional<Bytes>& list) {
    Fields sen;
    sen.set(std::string(kUserId), user);
    sen.set(std::string(kMasterPassword), "master-" + user);
    sen.set(std::string(kSecretPhrase), "phrase-" + user);
    Fields in = through(tunnel(), sen);
    if (list) in.set(std::string(kSealedPassList), *list);
    return run(PalOption::registration, in);
  }

  PalEnvelope authenticate(const Bytes& list, const std::string& clear_user, const std::string& user,
                           const std::string& password, std::string_view kind) {
    Fields sen;
    sen.set(std::string(kUserId), user);
    sen.set(std::string(kPassword), password);
    sen.set(std::string(kKind), kind);
    Fields in = through(tunnel(), sen);
    in.set(std::string(kSealedPassList), list);
    in.set(std::string(kUserId), clear_user);
    return run(PalOption::authentication, in);
  }

  crypto::Rng rng_{11, "pal-test"};
  crypto::Rng ca_rng_{11, "ca"};
  crypto::CertificateAuthority ca_{ca_rng_};
  tpm::TpmEmulator tpm_{ca_, 11};
  std::unique_ptr<crypto::KeyPair> pm_;
  Bytes pal_image_ = release_image(Module::pal);
  Bytes flicker_ = release_image(Module::flicker);
  Bytes proxy_ = release_image(Module::proxy);
};

TEST_F(PalTest, MeasuredChainFrozenValue) {
  tpm_.drtm_launch(as_bytes("test-pal-image"));
  EXPECT_EQ(tpm_.read_pcr(tpm::kDrtmPcr).hex(), "a37518251fd5c362532fe7551f95fd142d79251d");
  Bytes flicker = to_bytes("test-flicker-image");
  Bytes proxy = to_bytes("test-proxy-image");
  run_pal(tpm_, {flicker, proxy}, Bytes{});
  EXPECT_EQ(tpm_.read_pcr(tpm::kDrtmPcr).hex(), "afddc607734dc42f1fcf6ac5b6647a09f87820f9");
  tpm_.drtm_close();
}

TEST_F(PalTest, VerdictMeasurementsFrozen) {
  EXPECT_EQ(verdict_measurement(true).hex(), "bf8b4530d8d246dd74ac53a13471bba17941dff7");
  EXPECT_EQ(verdict_measurement(false).hex(), "5ba93c9db0cff93f52b521d7420e43f6eda2784f");
}

TEST_F(PalTest, EnvelopeRoundTrip) {
  Fields f;
  f.set("a", "b");
  PalEnvelope e = PalEnvelope::request(PalOption::registration, f);
  EXPECT_EQ(PalEnvelope::decode(e.encode()), e);
  PalEnvelope err = PalEnvelope::failure(PalOption::authentication, TimError(Errc::replay, "x", "s.1"));
  TimError back = PalEnvelope::decode(err.encode()).error();
  EXPECT_EQ(back.code(), Errc::replay);
  EXPECT_EQ(back.step(), "s.1");
  Bytes bad = e.encode();
  bad[0] ^= 1;
  EXPECT_TIM_ERROR(PalEnvelope::decode(bad), Errc::format_error);
}

TEST_F(PalTest, GarbageInputStopsAfterMeasurements) {
  PalEnvelope out = run_raw(as_bytes("not an envelope"));
  ASSERT_FALSE(out.ok());
  EXPECT_EQ(out.error().step(), "pal.input");
  check_schema(out.payload, error_schema(), "t");
  auto log = tpm_.measurement_log(tpm::kDrtmPcr).entries;
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[1].label, "flicker");
  EXPECT_EQ(log[2].label, "proxy");
}

TEST_F(PalTest, SchemaIsEnforcedBothWays) {
  EXPECT_EQ(run(PalOption::unknown, {}).error().code(), Errc::schema_violation);
  EXPECT_EQ(run(PalOption::initial_sealing, {}).error().code(), Errc::schema_violation);
  Fields extra;
  extra.set(std::string(kPmPub), pm_->public_key().encode());
  extra.set("stowaway", "x");
  PalEnvelope out = run(PalOption::initial_sealing, extra);
  EXPECT_EQ(out.error().code(), Errc::schema_violation);
  EXPECT_EQ(out.error().step(), "pal.input");
  PalEnvelope marked = PalEnvelope::failure(PalOption::secure_tunnel, TimError(Errc::usage, "x"));
  EXPECT_EQ(run_raw(marked.encode()).error().code(), Errc::schema_violation);
}

TEST_F(PalTest, InitialSealingChecksKeyProvenance) {
  sealed_pm_pub();
  crypto::KeyPair other = crypto::generate_keypair(crypto::KeyPurpose::proxy, rng_);
  Fields in;
  in.set(std::string(kPmPub), other.public_key().encode());
  PalEnvelope out = run(PalOption::initial_sealing, in);
  EXPECT_EQ(out.error().code(), Errc::key_provenance);
  EXPECT_EQ(out.error().step(), "initial-sealing.3b");
}

TEST_F(PalTest, SecureTunnelBindsKeyAndNonce) {
  Tunnel t = tunnel();
  auto log = tpm_.measurement_log(tpm::kDrtmPcr).entries;
  ASSERT_EQ(log.size(), 4u);
  EXPECT_EQ(log[3].label, "tunnel-binding");
  EXPECT_EQ(log[3].measurement, tunnel_binding(t.pal_pub, t.nonce));
}

TEST_F(PalTest, DataExtractionReportsLengthOnly) {
  Tunnel t = tunnel();
  Fields sen;
  sen.set("secret", "0123456789");
  Fields in;
  in.set(std::string(kEncData), crypto::encrypt(t.pal_pub, as_bytes("0123456789"), rng_));
  in.set(std::string(kSealedPalPriv), t.sealed);
  in.set(std::string(kNonce), t.nonce);
  PalEnvelope out = run(PalOption::data_extraction, in);
  ASSERT_TRUE(out.ok());
  Reader r(out.payload.get(kLength));
  EXPECT_EQ(r.u32(), 10u);
  EXPECT_FALSE(contains_subsequence(out.encode(), as_bytes("0123456789")));
}

TEST_F(PalTest, RegistrationSealsPassListAndReturnsParams) {
  PalEnvelope out = register_user("alice", std::nullopt);
  ASSERT_TRUE(out.ok()) << out.error().what();
  otp::OtpParams p = otp::OtpParams::parse(out.payload.get_string(kOtpParams));
  EXPECT_EQ(p.count, otp::kDefaultCount);
  Bytes list = out.payload.get(kSealedPassList);
  EXPECT_FALSE(contains_subsequence(list, as_bytes("master-alice")));
  PalEnvelope second = register_user("bob", list);
  ASSERT_TRUE(second.ok());
  Bytes both = second.payload.get(kSealedPassList);
  EXPECT_TRUE(authenticate(both, "alice", "alice", "master-alice", "master").payload.get(kVerdict)[0]);
  EXPECT_TRUE(authenticate(both, "bob", "bob", "master-bob", "master").payload.get(kVerdict)[0]);
}

TEST_F(PalTest, RegistrationRejectsEmptyFieldsAndNonceMismatch) {
  Fields sen;
  sen.set(std::string(kUserId), "u");
  sen.set(std::string(kMasterPassword), "");
  sen.set(std::string(kSecretPhrase), "p");
  PalEnvelope out = run(PalOption::registration, through(tunnel(), sen));
  EXPECT_EQ(out.error().code(), Errc::schema_violation);
  EXPECT_EQ(out.error().step(), "registration.3b");

  Tunnel t = tunnel();
  t.nonce[0] ^= 1;
  sen.set(std::string(kMasterPassword), "m");
  out = run(PalOption::registration, through(t, sen));
  EXPECT_EQ(out.error().code(), Errc::replay);
}

TEST_F(PalTest, MasterPasswordVerdicts) {
  Bytes list = register_user("alice", std::nullopt).payload.get(kSealedPassList);
  auto verdict = [](const PalEnvelope& e) { return e.payload.get(kVerdict).at(0); };
  EXPECT_EQ(verdict(authenticate(list, "alice", "alice", "master-alice", "master")), kVerdictAccept);
  auto log = tpm_.measurement_log(tpm::kDrtmPcr).entries;
  EXPECT_EQ(log.back().label, "auth-verdict");
  EXPECT_EQ(log.back().measurement, verdict_measurement(true));
  EXPECT_EQ(verdict(authenticate(list, "alice", "alice", "wrong", "master")), kVerdictReject);
  EXPECT_EQ(tpm_.measurement_log(tpm::kDrtmPcr).entries.back().measurement, verdict_measurement(false));
  EXPECT_EQ(verdict(authenticate(list, "nobody", "nobody", "master-alice", "master")), kVerdictReject);
  // The tunnelled user must match the one the proxy names in the clear.
  EXPECT_EQ(verdict(authenticate(list, "mallory", "alice", "master-alice", "master")), kVerdictReject);
  EXPECT_EQ(authenticate(list, "alice", "alice", "x", "pin").error().code(), Errc::schema_violation);
}

TEST_F(PalTest, OtpAcceptedOnceThenReportedAsReplay) {
  PalEnvelope reg = register_user("alice", std::nullopt);
  Bytes list = reg.payload.get(kSealedPassList);
  auto params = otp::OtpParams::parse(reg.payload.get_string(kOtpParams));
  auto chain = otp::derive_chain("phrase-alice", params);

  PalEnvelope first = authenticate(list, "alice", "alice", otp::format_password(chain[0]), "otp");
  ASSERT_EQ(first.payload.get(kVerdict)[0], kVerdictAccept);
  Bytes advanced = first.payload.get(kSealedPassList);

  PalEnvelope again = authenticate(advanced, "alice", "alice", otp::format_password(chain[0]), "otp");
  EXPECT_EQ(again.payload.get(kVerdict)[0], kVerdictReject);
  EXPECT_EQ(again.payload.get_string(kReason), "otp_replay");
  EXPECT_FALSE(again.payload.has(kSealedPassList));

  PalEnvelope skip = authenticate(advanced, "alice", "alice", otp::format_password(chain[2]), "otp");
  EXPECT_EQ(skip.payload.get(kVerdict)[0], kVerdictReject);
  EXPECT_FALSE(skip.payload.has(kReason));

  EXPECT_EQ(authenticate(advanced, "alice", "alice", otp::format_password(chain[1]), "otp").payload.get(kVerdict)[0],
            kVerdictAccept);
}

TEST_F(PalTest, CredentialDecryptionReencryptsForTheProxy) {
  Bytes pm_blob = sealed_pm_pub();
  Tunnel t = tunnel();
  Nonce nonce_prime = rng_.nonce();
  Fields in;
  in.set(std::string(kEncCred), crypto::encrypt(t.pal_pub, as_bytes("user=alice;pass=hunter2"), rng_));
  in.set(std::string(kSealedPalPriv), t.sealed);
  in.set(std::string(kNonce), t.nonce);
  in.set(std::string(kSealedPmPub), pm_blob);
  in.set(std::string(kNoncePrime), nonce_prime);
  PalEnvelope out = run(PalOption::credential_decryption, in);
  ASSERT_TRUE(out.ok()) << out.error().what();
  Fields plain = Fields::decode(crypto::decrypt(*pm_, out.payload.get(kEncCredWithPm)));
  EXPECT_EQ(plain.get_string(kCredentials), "user=alice;pass=hunter2");
  EXPECT_EQ(plain.get_fixed<Nonce>(kNoncePrime), nonce_prime);

  in.set(std::string(kNonce), rng_.nonce());
  out = run(PalOption::credential_decryption, in);
  EXPECT_EQ(out.error().code(), Errc::replay);
  EXPECT_EQ(out.error().step(), "credential-decryption.3c");
}

TEST_F(PalTest, ModifiedLayerCannotUnsealProxyKey) {
  Bytes pm_blob = sealed_pm_pub();
  Tunnel t = tunnel();
  Fields in;
  in.set(std::string(kEncCred), crypto::encrypt(t.pal_pub, as_bytes("c"), rng_));
  in.set(std::string(kSealedPalPriv), t.sealed);
  in.set(std::string(kNonce), t.nonce);
  in.set(std::string(kSealedPmPub), pm_blob);
  in.set(std::string(kNoncePrime), rng_.nonce());
  flicker_.push_back(0x90);
  PalEnvelope out = run(PalOption::credential_decryption, in);
  EXPECT_EQ(out.error().code(), Errc::seal_violation);
  EXPECT_EQ(out.error().step(), "credential-decryption.3a");
}

TEST_F(PalTest, PassListEncodingRoundTrip) {
  PassList list;
  PassEntry e;
  e.user_id = "alice";
  e.salt = Salt::from(Bytes(20, 7));
  e.master_hash = master_hash(e.salt, "pw");
  e.otp_params.seed = "ab";
  e.otp = otp::initial_chain("p", e.otp_params);
  list.upsert(e);
  e.otp.remaining = 3;
  list.upsert(e);
  EXPECT_EQ(list.size(), 1u);
  EXPECT_EQ(list.find("alice")->otp.remaining, 3u);
  EXPECT_EQ(PassList::decode(list.encode()), list);
  EXPECT_EQ(list.find("bob"), nullptr);
  EXPECT_NE(master_hash(e.salt, "pw"), master_hash(Salt::from(Bytes(20, 8)), "pw"));
}

TEST_F(PalTest, FileInterfaceWritesAnErrorForMissingInput) {
  testing::TempDir dir;
  tpm_.drtm_launch(pal_image_);
  run_pal_files(tpm_, {flicker_, proxy_}, dir / "missing.in", dir / "out.bin");
  tpm_.drtm_close();
  EXPECT_FALSE(PalEnvelope::decode(read_file(dir / "out.bin")).ok());
}

}  // namespace
}  // namespace tim::pal
