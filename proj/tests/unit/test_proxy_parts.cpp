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

#include <fstream>

#include "test_util.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/file_io.hpp"
#include "tim/pal/image.hpp"
#include "tim/proxy/artifacts.hpp"
#include "tim/proxy/config.hpp"
#include "tim/proxy/database.hpp"
#include "tim/proxy/flicker.hpp"
#include "tim/proxy/forms.hpp"
#include "tim/wire/frame.hpp"

namespace tim::proxy {
namespace {

// ---- forms

TEST(Forms, ModeTable) {
  EXPECT_EQ(choose_mode(PageKind::login, false), RenderMode::enroll);
  EXPECT_EQ(choose_mode(PageKind::login, true), RenderMode::submit);
  EXPECT_EQ(choose_mode(PageKind::update, true), RenderMode::update);
  EXPECT_EQ(choose_mode(PageKind::update, false), RenderMode::plain);
  EXPECT_EQ(choose_mode(PageKind::other, true), RenderMode::plain);
  for (auto m : {RenderMode::enroll, RenderMode::submit, RenderMode::update, RenderMode::plain})
    EXPECT_EQ(render_mode_from_name(render_mode_name(m)), m);
  for (auto k : {PageKind::login, PageKind::update, PageKind::other})
    EXPECT_EQ(page_kind_from_name(page_kind_name(k)), k);
  EXPECT_FALSE(page_kind_from_name("nope"));
}

TEST(Forms, RenderPutsDummiesOnlyWhereCredentialsAreStored) {
  crypto::Rng rng(1, "forms");
  Fields enroll = render_fields(login_schema(), RenderMode::enroll, rng);
  EXPECT_EQ(enroll.get_string("username"), "");
  EXPECT_EQ(enroll.get_string("password"), "");

  Fields submit = render_fields(login_schema(), RenderMode::submit, rng);
  EXPECT_EQ(submit.get_string("username").size(), 32u);
  EXPECT_NE(submit.get_string("username"), submit.get_string("password"));

  Fields update = render_fields(update_schema(), RenderMode::update, rng);
  EXPECT_EQ(update.get_string("old_username").size(), 32u);
  EXPECT_EQ(update.get_string("old_password").size(), 32u);
  EXPECT_EQ(update.get_string("username"), "");
  EXPECT_EQ(update.get_string("password"), "");
}

TEST(Forms, FillMapsOldValuesPositionally) {
  Fields creds;
  creds.set("username", "alice").set("password", "new");
  Fields old;
  old.set("username", "alice").set("password", "old");
  Fields form = fill_form(update_schema(), creds, &old);
  EXPECT_EQ(form.get_string("password"), "new");
  EXPECT_EQ(form.get_string("old_password"), "old");
  EXPECT_EQ(form.get_string("old_username"), "alice");
  EXPECT_EQ(form.size(), 4u);
}

TEST(Forms, SchemaValidationAndEncoding) {
  for (const auto& s : {login_schema(), update_schema(), FormSchema{PageKind::other, {"query"}, {}, {}}}) {
    s.validate();
    EXPECT_EQ(FormSchema::decode(s.encode()), s);
  }
  std::vector<FormSchema> bad = {
      {PageKind::login, {"a", "a"}, {"a"}, {}},
      {PageKind::login, {"a"}, {"b"}, {}},
      {PageKind::login, {"a"}, {}, {}},
      {PageKind::login, {"a", "b"}, {"a"}, {"b"}},
      {PageKind::update, {"a", "b", "c"}, {"a", "b"}, {"c"}},
      {PageKind::update, {"a", "b"}, {"a"}, {"a"}},
  };
  for (const auto& s : bad) EXPECT_TIM_ERROR(s.validate(), Errc::schema_violation);
}

// ---- database

CredentialRecord record(const std::string& user, const std::string& site, std::uint8_t tag) {
  CredentialRecord r;
  r.user_id = user;
  r.site_id = site;
  r.enc_cred_with_pal = Bytes(40, tag);
  r.sealed_pal_priv.ciphertext = Bytes(8, tag);
  r.nonce = Nonce::from(Bytes(20, tag));
  r.form_schema = login_schema();
  return r;
}

TEST(Database, PersistsAcrossReopen) {
  testing::TempDir dir;
  tpm::SealedBlob list;
  list.ciphertext = {1, 2, 3};
  {
    CredentialDb db(dir / "c.db");
    db.set_pass_list(list);
    db.insert(record("alice", "shop", 1));
    db.insert(record("alice", "mail", 2));
    db.replace(record("alice", "shop", 3));
  }
  CredentialDb db(dir / "c.db");
  EXPECT_EQ(db.pass_list(), list);
  EXPECT_FALSE(db.sealed_pm_pub());
  EXPECT_EQ(db.records().size(), 2u);
  EXPECT_EQ(db.find("alice", "shop"), record("alice", "shop", 3));
  EXPECT_FALSE(db.find("bob", "shop"));
}

TEST(Database, InsertAndReplaceGuards) {
  testing::TempDir dir;
  CredentialDb db(dir / "c.db");
  db.insert(record("a", "s", 1));
  EXPECT_TIM_ERROR(db.insert(record("a", "s", 2)), Errc::usage);
  EXPECT_TIM_ERROR(db.replace(record("b", "s", 2)), Errc::no_record);
}

TEST(Database, ObserverSeesFileContents) {
  testing::TempDir dir;
  CredentialDb db(dir / "c.db");
  Bytes last;
  db.set_persist_observer([&](ByteView b) { last.assign(b.begin(), b.end()); });
  db.insert(record("a", "s", 9));
  EXPECT_EQ(last, read_file(dir / "c.db"));
}

TEST(Database, RejectsForeignOrCorruptFiles) {
  testing::TempDir dir;
  write_file_atomic(dir / "x.db", as_bytes("NOPE...."));
  EXPECT_TIM_ERROR(CredentialDb(dir / "x.db"), Errc::format_error);
  {
    CredentialDb db(dir / "y.db");
    db.insert(record("a", "s", 1));
  }
  Bytes b = read_file(dir / "y.db");
  b.resize(b.size() - 3);
  write_file_atomic(dir / "y.db", b);
  EXPECT_TIM_ERROR(CredentialDb(dir / "y.db"), Errc::format_error);
}

// ---- config

TEST(Config, RoundTripAndErrors) {
  ProxyConfig c;
  c.listen_address = "proxy-2";
  c.session_idle_timeout = 60;
  ProxyConfig back = ProxyConfig::parse(c.to_text());
  EXPECT_EQ(back.listen_address, "proxy-2");
  EXPECT_EQ(back.session_idle_timeout, 60);
  EXPECT_EQ(back.db_path, c.db_path);

  ProxyConfig d = ProxyConfig::parse("# comment\n\n  db_path = /tmp/x.db  \n");
  EXPECT_EQ(d.db_path, "/tmp/x.db");
  EXPECT_EQ(d.session_idle_timeout, ProxyConfig{}.session_idle_timeout);

  EXPECT_TIM_ERROR(ProxyConfig::parse("bogus = 1\n"), Errc::format_error);
  EXPECT_TIM_ERROR(ProxyConfig::parse("db_path\n"), Errc::format_error);
  EXPECT_TIM_ERROR(ProxyConfig::parse("session_idle_timeout = soon\n"), Errc::format_error);
  EXPECT_TIM_ERROR(ProxyConfig::parse("session_idle_timeout = -5\n"), Errc::format_error);
  EXPECT_TIM_ERROR(ProxyConfig::parse("listen_address =\n"), Errc::format_error);
}

// ---- trusted boot

TEST(Boot, ReleaseArtifactsBoot) {
  BootReport r = trusted_boot(BootManifest::release(), ArtifactStore::release());
  ASSERT_EQ(r.modules.size(), 2u);
  for (const auto& m : r.modules) EXPECT_EQ(m.expected, m.measured);
  BootManifest m = BootManifest::release();
  EXPECT_EQ(BootManifest::parse(m.to_text()), m);
}

TEST(Boot, TamperedModuleIsRefusedByName) {
  for (Module mod : {Module::proxy, Module::flicker}) {
    ArtifactStore a = ArtifactStore::release();
    Bytes img = a.get(mod);
    img.back() ^= 1;
    a.set(mod, img);
    TimError e = testing::capture_error([&] { trusted_boot(BootManifest::release(), a); });
    EXPECT_EQ(e.code(), Errc::boot_refused);
    EXPECT_EQ(e.step(), "boot.measure");
    EXPECT_NE(std::string(e.what()).find(std::string(pal::module_name(mod))), std::string::npos);
  }
}

TEST(Boot, ManifestParseErrors) {
  EXPECT_TIM_ERROR(BootManifest::parse(""), Errc::format_error);
  EXPECT_TIM_ERROR(BootManifest::parse("proxy 1234\n"), Errc::format_error);
  BootManifest m;
  m.entries.push_back({"kernel", crypto::hash("k")});
  EXPECT_TIM_ERROR(trusted_boot(m, ArtifactStore::release()), Errc::format_error);
}

TEST(Boot, ReleaseImagesDifferPerModule) {
  EXPECT_NE(pal::release_image(Module::pal), pal::release_image(Module::flicker));
  EXPECT_NE(pal::release_image(Module::flicker), pal::release_image(Module::proxy));
  EXPECT_EQ(pal::release_image(Module::pal), pal::release_image(Module::pal));
}

// ---- flicker

class FlickerTest : public ::testing::Test {
 protected:
  crypto::Rng ca_rng{5, "ca"};
  crypto::CertificateAuthority ca{ca_rng};
  tpm::TpmEmulator tpm{ca, 5};
  ArtifactStore artifacts = ArtifactStore::release();
  testing::TempDir dir;
  Flicker flicker{tpm, artifacts, dir.path()};
};

TEST_F(FlickerTest, InvokeClosesSessionAndAttests) {
  Nonce n = Nonce::from(Bytes(20, 3));
  FlickerResult r = flicker.invoke(pal::PalEnvelope::request(pal::PalOption::secure_tunnel, {}), n);
  EXPECT_TRUE(r.output.ok());
  EXPECT_FALSE(tpm.drtm_active());
  ASSERT_TRUE(r.attestation);
  EXPECT_TRUE(tpm::verify_quote(r.attestation->quote, n, r.attestation->sml, ca.public_key()).ok());
  EXPECT_EQ(r.attestation->sml.entries.front().measurement, artifacts.measure(Module::pal));
}

TEST_F(FlickerTest, RefusesWhileAnotherSessionIsOpen) {
  tpm.drtm_launch(as_bytes("x"));
  EXPECT_TIM_ERROR(flicker.invoke(pal::PalEnvelope::request(pal::PalOption::secure_tunnel, {})), Errc::exclusivity);
  tpm.drtm_close();
}

TEST_F(FlickerTest, HooksSeeTheFilesAndGarbageOutputIsRejected) {
  bool saw_input = false;
  flicker.set_input_hook([&](const std::filesystem::path& p) { saw_input = std::filesystem::exists(p); });
  flicker.set_output_hook([](const std::filesystem::path& p) { write_file_atomic(p, as_bytes("junk")); });
  TimError e = testing::capture_error([&] { flicker.invoke(pal::PalEnvelope::request(pal::PalOption::secure_tunnel, {})); });
  EXPECT_TRUE(saw_input);
  EXPECT_EQ(e.code(), Errc::protocol_violation);
  EXPECT_EQ(e.step(), "flicker.output");
  EXPECT_FALSE(tpm.drtm_active());
}

// ---- wire

TEST(Wire, FrameRoundTripAndErrors) {
  wire::Frame f{7, 3, "client:a", "proxy", std::string(wire::kind::kAuthSubmit), to_bytes("body")};
  EXPECT_EQ(wire::Frame::decode(f.encode()), f);
  Bytes bad = f.encode();
  bad[0] = 9;
  EXPECT_TIM_ERROR(wire::Frame::decode(bad), Errc::format_error);
  Bytes trailing = f.encode();
  trailing.push_back(0);
  EXPECT_TIM_ERROR(wire::Frame::decode(trailing), Errc::format_error);

  TimError e(Errc::replay, "again", "enrollment.10a");
  TimError back = wire::error_from_body(wire::error_body(e));
  EXPECT_EQ(back.code(), Errc::replay);
  EXPECT_EQ(back.step(), "enrollment.10a");
}

class CannedTransport : public wire::Transport {
 public:
  explicit CannedTransport(wire::Frame reply) : reply_(std::move(reply)) {}
  wire::Frame call(std::string_view, std::string_view, std::string_view, const Fields&) override { return reply_; }

 private:
  wire::Frame reply_;
};

TEST(Wire, RequestUnwrapsReplies) {
  Fields ok;
  ok.set("x", "1");
  CannedTransport good({1, 1, "proxy", "c", std::string(wire::kind::kAuthDone), ok.encode()});
  EXPECT_EQ(wire::request(good, "c", "proxy", "auth.submit", {}, wire::kind::kAuthDone).get_string("x"), "1");
  EXPECT_TIM_ERROR(wire::request(good, "c", "proxy", "auth.submit", {}, wire::kind::kPageRender),
                   Errc::protocol_violation);
  CannedTransport err({1, 1, "proxy", "c", std::string(wire::kind::kError),
                       wire::error_body(TimError(Errc::not_authenticated, "no")).encode()});
  EXPECT_TIM_ERROR(wire::request(err, "c", "proxy", "page.visit", {}, wire::kind::kPageRender),
                   Errc::not_authenticated);
  CannedTransport garbage({1, 1, "proxy", "c", std::string(wire::kind::kAuthDone), to_bytes("zz")});
  EXPECT_TIM_ERROR(wire::request(garbage, "c", "proxy", "auth.submit", {}, wire::kind::kAuthDone),
                   Errc::protocol_violation);
}

}  // namespace
}  // namespace tim::proxy
