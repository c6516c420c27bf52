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

#include <thread>

#include "test_util.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/harness/world.hpp"

namespace tim::harness {
namespace {

using client::Client;
using pal::PasswordKind;
using proxy::PageKind;
using proxy::RenderMode;

Fields creds(const std::string& user, const std::string& pass) {
  Fields f;
  f.set("username", user).set("password", pass);
  return f;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    world.boot();
    world.add_site("shop").add_account("alice.shop", "shop-pw");
    alice = &world.add_client("alice", "alice");
    alice->register_user("master-pw", "secret phrase");
  }

  void login() { alice->authenticate("master-pw", PasswordKind::master); }

  void enroll_shop() {
    auto page = alice->visit("shop", PageKind::login);
    ASSERT_EQ(page.mode, RenderMode::enroll);
    ASSERT_TRUE(alice->enroll(page, creds("alice.shop", "shop-pw")));
  }

  World world{21};
  Client* alice = nullptr;
};

TEST_F(ServiceTest, EnrollThenSubmitWithDummies) {
  login();
  enroll_shop();
  EXPECT_EQ(world.site("shop").accepted(), 1u);
  auto page = alice->visit("shop", PageKind::login);
  EXPECT_EQ(page.mode, RenderMode::submit);
  EXPECT_EQ(page.fields.get_string("username").size(), 32u);
  EXPECT_NE(page.fields.get_string("username"), "alice.shop");
  alice->submit_dummy_page(page);
  EXPECT_EQ(world.site("shop").accepted(), 2u);
  EXPECT_EQ(world.site("shop").last_login(), "alice.shop");
  EXPECT_EQ(world.proxy().database().records().size(), 1u);
}

TEST_F(ServiceTest, PagesNeedAnAuthenticatedSession) {
  EXPECT_TIM_ERROR(alice->visit("shop", PageKind::login), Errc::not_authenticated);
  EXPECT_TIM_ERROR(alice->authenticate("wrong", PasswordKind::master), Errc::authentication_refused);
  EXPECT_FALSE(alice->session());
  EXPECT_TIM_ERROR(alice->visit("shop", PageKind::login), Errc::not_authenticated);
}

TEST_F(ServiceTest, WrongPasswordIsRefused) {
  TimError e = testing::capture_error([&] { alice->authenticate("wrong", PasswordKind::master); });
  EXPECT_EQ(e.code(), Errc::authentication_refused);
  EXPECT_EQ(e.step(), "authentication.6b");
}

TEST_F(ServiceTest, IdleSessionExpires) {
  login();
  const std::string token = alice->session()->token;
  world.advance_clock(world.proxy().config().session_idle_timeout - 1);
  EXPECT_NO_THROW(alice->visit("shop", PageKind::other));
  world.advance_clock(world.proxy().config().session_idle_timeout + 1);
  EXPECT_FALSE(world.proxy().session_authenticated(token));
  EXPECT_TIM_ERROR(alice->visit("shop", PageKind::other), Errc::not_authenticated);
}

TEST_F(ServiceTest, ForgedCertificateEndsOnlyThatVisit) {
  world.add_site("evil", true);
  login();
  TimError e = testing::capture_error([&] { alice->visit("evil", PageKind::login); });
  EXPECT_EQ(e.code(), Errc::certificate_rejected);
  EXPECT_EQ(e.step(), "enrollment.4a");
  EXPECT_NO_FATAL_FAILURE(enroll_shop());
}

TEST_F(ServiceTest, UnreachableSiteStoresNothing) {
  login();
  auto page = alice->visit("shop", PageKind::login);
  world.take_site_down("shop");
  EXPECT_TIM_ERROR(alice->enroll(page, creds("alice.shop", "shop-pw")), Errc::target_unavailable);
  EXPECT_TRUE(world.proxy().database().records().empty());
  EXPECT_TIM_ERROR(alice->visit("shop", PageKind::login), Errc::target_unavailable);
}

TEST_F(ServiceTest, RejectedEnrollmentStoresNothing) {
  login();
  auto page = alice->visit("shop", PageKind::login);
  EXPECT_TIM_ERROR(alice->enroll(page, creds("alice.shop", "not-it")), Errc::target_rejected);
  EXPECT_TRUE(world.proxy().database().records().empty());
}

TEST_F(ServiceTest, UpdateWithoutRecordIsRefused) {
  login();
  auto page = alice->visit("shop", PageKind::update);
  EXPECT_EQ(page.mode, RenderMode::plain);
  EXPECT_TIM_ERROR(alice->update(page, creds("alice.shop", "new")), Errc::no_record);
}

TEST_F(ServiceTest, UpdateReplacesStoredCredentials) {
  login();
  enroll_shop();
  auto page = alice->visit("shop", PageKind::update);
  ASSERT_EQ(page.mode, RenderMode::update);
  EXPECT_EQ(page.fields.get_string("old_password").size(), 32u);
  ASSERT_TRUE(alice->update(page, creds("alice.shop", "shop-pw-2")));
  EXPECT_EQ(world.site("shop").password_of("alice.shop"), "shop-pw-2");
  alice->submit_dummy_page(alice->visit("shop", PageKind::login));
  EXPECT_EQ(world.site("shop").last_login(), "alice.shop");
}

TEST_F(ServiceTest, PageTokensAreSingleUse) {
  login();
  auto page = alice->visit("shop", PageKind::login);
  ASSERT_TRUE(alice->enroll(page, creds("alice.shop", "shop-pw")));
  TimError e = testing::capture_error([&] { alice->enroll(page, creds("alice.shop", "shop-pw")); });
  EXPECT_EQ(e.code(), Errc::replay);
  EXPECT_EQ(e.step(), "enrollment.10a");
}

TEST_F(ServiceTest, EmptyCredentialsSendNothing) {
  login();
  auto page = alice->visit("shop", PageKind::login);
  const std::size_t before = world.network().transcript_size();
  EXPECT_FALSE(alice->enroll(page, Fields{}));
  EXPECT_FALSE(alice->update(page, Fields{}));
  EXPECT_EQ(world.network().transcript_size(), before);
}

TEST_F(ServiceTest, RecordsSurviveReboot) {
  login();
  enroll_shop();
  world.reboot();
  login();
  alice->submit_dummy_page(alice->visit("shop", PageKind::login));
  EXPECT_EQ(world.site("shop").accepted(), 2u);
}

TEST_F(ServiceTest, RuntimeTablesRoundTrip) {
  login();
  auto page = alice->visit("shop", PageKind::login);
  Bytes state = world.proxy().export_runtime();
  world.proxy().import_runtime(state);
  EXPECT_EQ(world.proxy().export_runtime(), state);
  EXPECT_TRUE(world.proxy().session_authenticated(alice->session()->token));
  EXPECT_TRUE(alice->enroll(page, creds("alice.shop", "shop-pw")));
  EXPECT_TIM_ERROR(world.proxy().import_runtime(as_bytes("TIMR")), Errc::format_error);
}

TEST_F(ServiceTest, OtpLoginAdvancesAndPersistsCursor) {
  alice->authenticate_with_otp("secret phrase");
  EXPECT_EQ(alice->profile().otp_cursor, 1u);
  testing::TempDir dir;
  alice->profile().save(dir / "p.timp");
  auto loaded = client::ClientProfile::load(dir / "p.timp");
  EXPECT_EQ(loaded, alice->profile());

  crypto::Rng rng(99, "restart");
  Client restarted(loaded, "client:alice-2", world.network(), rng, [this] { return world.now(); });
  restarted.authenticate_with_otp("secret phrase");
  EXPECT_EQ(restarted.profile().otp_cursor, 2u);
  EXPECT_TRUE(restarted.session());
  // A stale copy of the profile replays an element the PAL already consumed.
  Client stale(loaded, "client:alice-3", world.network(), rng, [this] { return world.now(); });
  TimError e = testing::capture_error([&] { stale.authenticate_with_otp("secret phrase"); });
  EXPECT_EQ(e.code(), Errc::replay);
  EXPECT_EQ(e.step(), "authentication.4b");
}

TEST_F(ServiceTest, OtpListMatchesCursorOrder) {
  auto list = alice->otp_list("secret phrase");
  ASSERT_EQ(list.size(), otp::kDefaultCount);
  alice->authenticate(list[0], PasswordKind::otp);
  EXPECT_TRUE(alice->session());
}

TEST_F(ServiceTest, AddonNeedsAPinnedTunnel) {
  EXPECT_TIM_ERROR(alice->addon_encrypt_fields(creds("a", "b")), Errc::not_authenticated);
  login();
  EXPECT_TRUE(alice->addon_encrypt_fields(Fields{}).empty());
  Bytes enc = alice->addon_encrypt_fields(creds("a", "secret-b"));
  EXPECT_FALSE(contains_subsequence(enc, as_bytes("secret-b")));
}

TEST_F(ServiceTest, SubstitutedTunnelKeyIsRefused) {
  crypto::KeyPair fake = crypto::generate_keypair(crypto::KeyPurpose::pal, world.attacker_rng());
  world.network().add_tap([&](TapContext& ctx) {
    if (ctx.direction != Direction::reply || ctx.frame.kind != wire::kind::kTunnelOffer) return;
    Fields f = ctx.frame.fields();
    f.set("pal_pub", fake.public_key().encode());
    ctx.frame.body = f.encode();
  });
  TimError e = testing::capture_error([&] { alice->establish_tunnel("auth"); });
  EXPECT_EQ(e.code(), Errc::tunnel_refused);
  EXPECT_EQ(e.step(), "secure-tunnel.6a");
  EXPECT_FALSE(alice->session());
}

TEST_F(ServiceTest, UnexpectedMeasurementsFailAttestation) {
  auto ref = proxy::ReferenceMeasurements::release();
  ref.pal = crypto::hash("some other pal");
  crypto::Rng rng(5, "c");
  Client picky(alice->profile(), "client:picky", world.network(), rng, [this] { return world.now(); }, ref);
  TimError e = testing::capture_error([&] { picky.establish_tunnel("auth"); });
  EXPECT_EQ(e.code(), Errc::attestation_failure);
  EXPECT_EQ(e.step(), "secure-tunnel.6a");
}

TEST_F(ServiceTest, TunnelOffersAreSingleUse) {
  std::optional<wire::Frame> offer_request;
  world.network().add_tap([&](TapContext& ctx) {
    if (ctx.direction == Direction::request && ctx.frame.kind == wire::kind::kAuthSubmit) offer_request = ctx.frame;
  });
  login();
  ASSERT_TRUE(offer_request);
  wire::Frame reply = world.network().inject(*offer_request);
  EXPECT_EQ(reply.kind, wire::kind::kError);
  EXPECT_EQ(wire::error_from_body(reply.fields()).code(), Errc::replay);
}

TEST(ClientProfile, EncodingRoundTripAndRejects) {
  client::ClientProfile p;
  p.user_id = "bob";
  p.otp_params = otp::OtpParams{"ab12", 10, std::string(otp::kAlgorithmTag)};
  p.otp_cursor = 4;
  EXPECT_EQ(client::ClientProfile::decode(p.encode()), p);
  Bytes b = p.encode();
  b[0] ^= 1;
  EXPECT_TIM_ERROR(client::ClientProfile::decode(b), Errc::format_error);
}

TEST(Concurrency, ManyClientsShareOneLateLaunchAtATime) {
  World world(33);
  world.boot();
  constexpr int kClients = 16;
  auto& site = world.add_site("shop");
  std::vector<Client*> clients;
  for (int i = 0; i < kClients; ++i) {
    const std::string name = "user" + std::to_string(i);
    site.add_account(name + ".shop", "pw-" + name);
    clients.push_back(&world.add_client(name, name));
  }
  std::atomic<int> done{0};
  std::vector<std::string> errors(kClients);
  std::vector<std::thread> threads;
  for (int i = 0; i < kClients; ++i) {
    threads.emplace_back([&, i] {
      const std::string name = "user" + std::to_string(i);
      try {
        Client& c = *clients[i];
        c.register_user("m-" + name, "p-" + name);
        c.authenticate("m-" + name, PasswordKind::master);
        c.enroll(c.visit("shop", PageKind::login), creds(name + ".shop", "pw-" + name));
        c.authenticate_with_otp("p-" + name);
        c.submit_dummy_page(c.visit("shop", PageKind::login));
        ++done;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < kClients; ++i) EXPECT_EQ(errors[i], "") << "client " << i;
  EXPECT_EQ(done.load(), kClients);
  EXPECT_EQ(world.tpm().exclusivity_violations(), 0u);
  EXPECT_EQ(world.proxy().database().records().size(), static_cast<std::size_t>(kClients));
  EXPECT_EQ(site.accepted(), 2u * kClients);
}

}  // namespace
}  // namespace tim::harness
