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
#include "tim/client/client.hpp"

#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"
#include "tim/file_io.hpp"
#include "tim/pal/envelope.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::client {

namespace fld = pal::field;

namespace {

constexpr std::string_view kProfileMagic = "TIMP";
constexpr std::uint16_t kProfileVersion = 1;

[[noreturn]] void refuse(Errc code, std::string message) {
  throw TimError(code, std::move(message), "secure-tunnel.6a");
}

}  // namespace

Bytes PinnedTunnel::encode() const {
  Writer w;
  w.str(tunnel_id).blob(pal_pub.encode()).fixed(nonce).u64(static_cast<std::uint64_t>(established_at));
  return std::move(w).bytes();
}

PinnedTunnel PinnedTunnel::decode(ByteView in) {
  Reader r(in);
  PinnedTunnel t;
  t.tunnel_id = r.str();
  t.pal_pub = crypto::PublicKey::decode(r.blob());
  t.nonce = r.fixed<Nonce>();
  t.established_at = static_cast<std::int64_t>(r.u64());
  r.expect_done("pinned tunnel");
  return t;
}

Bytes ClientProfile::encode() const {
  Writer w;
  w.raw(as_bytes(kProfileMagic)).u16(kProfileVersion).str(user_id);
  w.u8(otp_params ? 1 : 0);
  if (otp_params) w.str(otp_params->to_line());
  w.u32(otp_cursor).str(proxy_address).blob(ca_pub.encode());
  return std::move(w).bytes();
}

ClientProfile ClientProfile::decode(ByteView in) {
  Reader r(in);
  if (to_string(r.raw(4)) != kProfileMagic) throw TimError(Errc::format_error, "not a client profile");
  if (std::uint16_t v = r.u16(); v != kProfileVersion)
    throw TimError(Errc::format_error, "unsupported client profile version " + std::to_string(v));
  ClientProfile p;
  p.user_id = r.str();
  if (r.u8() == 1) p.otp_params = otp::OtpParams::parse(r.str());
  p.otp_cursor = r.u32();
  p.proxy_address = r.str();
  p.ca_pub = crypto::PublicKey::decode(r.blob());
  r.expect_done("client profile");
  return p;
}

void ClientProfile::save(const std::filesystem::path& path) const { write_file_atomic(path, encode()); }

ClientProfile ClientProfile::load(const std::filesystem::path& path) { return decode(read_file(path)); }

Bytes SessionHandle::encode() const {
  Writer w;
  w.str(token).blob(tunnel.encode());
  return std::move(w).bytes();
}

SessionHandle SessionHandle::decode(ByteView in) {
  Reader r(in);
  SessionHandle s;
  s.token = r.str();
  s.tunnel = PinnedTunnel::decode(r.blob());
  r.expect_done("session handle");
  return s;
}

Bytes RenderedPage::encode() const {
  Writer w;
  w.str(page_token).str(site).u8(static_cast<std::uint8_t>(kind)).u8(static_cast<std::uint8_t>(mode));
  w.blob(schema.encode()).blob(fields.encode());
  return std::move(w).bytes();
}

RenderedPage RenderedPage::decode(ByteView in) {
  Reader r(in);
  RenderedPage p;
  p.page_token = r.str();
  p.site = r.str();
  auto kind = r.u8();
  auto mode = r.u8();
  if (kind < 1 || kind > 3 || mode < 1 || mode > 4) throw TimError(Errc::format_error, "bad page");
  p.kind = static_cast<PageKind>(kind);
  p.mode = static_cast<RenderMode>(mode);
  p.schema = FormSchema::decode(r.blob());
  p.fields = Fields::decode(r.blob());
  r.expect_done("rendered page");
  return p;
}

Client::Client(ClientProfile profile, std::string endpoint, wire::Transport& network, crypto::Rng& rng,
               Clock clock, ReferenceMeasurements reference)
    : profile_(std::move(profile)),
      endpoint_(std::move(endpoint)),
      network_(network),
      rng_(rng),
      clock_(std::move(clock)),
      reference_(reference) {}

Fields Client::call(std::string_view kind, const Fields& body, std::string_view expected) {
  return wire::request(network_, endpoint_, profile_.proxy_address, kind, body, expected);
}

Fields Client::with_session(Fields body) const {
  if (session_) body.set("session", session_->token);
  return body;
}

PinnedTunnel Client::establish_tunnel(std::string_view purpose) {
  const Nonce attest_nonce = rng_.nonce();
  Fields req;
  req.set("purpose", purpose);
  req.set("attest_nonce", attest_nonce);
  Fields offer = call(wire::kind::kTunnelRequest, req, wire::kind::kTunnelOffer);

  PinnedTunnel t;
  tpm::Quote quote;
  tpm::MeasurementLog sml;
  try {
    t.tunnel_id = offer.get_string("tunnel_id");
    t.pal_pub = crypto::PublicKey::decode(offer.get("pal_pub"));
    t.nonce = offer.get_fixed<Nonce>("nonce");
    quote = tpm::Quote::decode(offer.get("quote"));
    sml = tpm::MeasurementLog::decode(offer.get("sml"));
  } catch (const TimError& e) {
    refuse(Errc::tunnel_refused, std::string("malformed tunnel offer: ") + e.what());
  }

  tpm::QuoteVerdict v = tpm::verify_quote(quote, attest_nonce, sml, profile_.ca_pub);
  if (v.reason == tpm::QuoteRejection::nonce_mismatch) refuse(Errc::replay, "quote answers another challenge");
  if (!v) refuse(Errc::attestation_failure, std::string(tpm::rejection_name(v.reason)) + ": " + v.detail);

  const auto& e = sml.entries;
  if (quote.pcr_index != tpm::kDrtmPcr || e.size() != 4)
    refuse(Errc::attestation_failure, "quote does not cover a single tunnel session");
  if (e[0].measurement != reference_.pal) refuse(Errc::attestation_failure, "PAL measurement differs");
  if (e[1].measurement != reference_.flicker) refuse(Errc::attestation_failure, "Flicker measurement differs");
  if (e[2].measurement != reference_.proxy) refuse(Errc::attestation_failure, "proxy measurement differs");
  if (e[3].measurement != pal::tunnel_binding(t.pal_pub, t.nonce))
    refuse(Errc::tunnel_refused, "offered PAL key is not the attested one");
  t.established_at = clock_();
  return t;
}

otp::OtpParams Client::register_user(std::string_view master_password, std::string_view secret_phrase) {
  PinnedTunnel t = establish_tunnel("register");
  Fields sen;
  sen.set(std::string(fld::kUserId), profile_.user_id);
  sen.set(std::string(fld::kMasterPassword), master_password);
  sen.set(std::string(fld::kSecretPhrase), secret_phrase);
  SecureBytes plain = sen.encode_secure();
  sen.clear();
  Fields req;
  req.set("tunnel_id", t.tunnel_id);
  req.set("enc_data", crypto::encrypt(t.pal_pub, plain, rng_));
  Fields done = call(wire::kind::kRegisterSubmit, req, wire::kind::kRegisterDone);
  otp::OtpParams params = otp::OtpParams::parse(done.get_string("otp_params"));
  profile_.otp_params = params;
  profile_.otp_cursor = 0;
  return params;
}

std::vector<std::string> Client::otp_list(std::string_view secret_phrase) const {
  if (!profile_.otp_params) throw TimError(Errc::usage, "no OTP parameters; register first");
  std::vector<std::string> out;
  for (const Digest& d : otp::derive_chain(secret_phrase, *profile_.otp_params)) out.push_back(otp::format_password(d));
  return out;
}

const SessionHandle& Client::authenticate(std::string_view password, pal::PasswordKind kind) {
  session_.reset();
  PinnedTunnel t = establish_tunnel("auth");
  Fields sen;
  sen.set(std::string(fld::kUserId), profile_.user_id);
  sen.set(std::string(fld::kPassword), password);
  sen.set(std::string(fld::kKind), pal::kind_name(kind));
  SecureBytes plain = sen.encode_secure();
  sen.clear();
  Fields req;
  req.set("tunnel_id", t.tunnel_id);
  req.set("user_id", profile_.user_id);
  req.set("enc_data", crypto::encrypt(t.pal_pub, plain, rng_));
  Fields done = call(wire::kind::kAuthSubmit, req, wire::kind::kAuthDone);
  session_ = SessionHandle{done.get_string("session"), std::move(t)};
  return *session_;
}

const SessionHandle& Client::authenticate_with_otp(std::string_view secret_phrase) {
  if (!profile_.otp_params) throw TimError(Errc::usage, "no OTP parameters; register first");
  if (profile_.otp_cursor >= profile_.otp_params->count) throw TimError(Errc::exhausted_chain, "OTP list used up");
  std::vector<Digest> chain = otp::derive_chain(secret_phrase, *profile_.otp_params);
  std::string password = otp::format_password(chain[profile_.otp_cursor]);
  ++profile_.otp_cursor;
  return authenticate(password, pal::PasswordKind::otp);
}

RenderedPage Client::visit(std::string_view site, PageKind kind) {
  Fields req;
  req.set("site", site);
  req.set("page_kind", proxy::page_kind_name(kind));
  Fields r = call(wire::kind::kPageVisit, with_session(std::move(req)), wire::kind::kPageRender);
  RenderedPage p;
  p.page_token = r.get_string("page_token");
  p.site = r.get_string("site");
  auto k = proxy::page_kind_from_name(r.get_string("page_kind"));
  auto m = proxy::render_mode_from_name(r.get_string("mode"));
  if (!k || !m) throw TimError(Errc::protocol_violation, "proxy rendered an unknown page");
  p.kind = *k;
  p.mode = *m;
  p.schema = FormSchema::decode(r.get("schema"));
  p.fields = Fields::decode(r.get("fields"));
  return p;
}

Bytes Client::addon_encrypt_fields(const Fields& credentials) {
  if (!session_) throw TimError(Errc::not_authenticated, "no verified tunnel is pinned for this session");
  if (credentials.empty()) return {};
  SecureBytes plain = credentials.encode_secure();
  return crypto::encrypt(session_->tunnel.pal_pub, plain, rng_);
}

std::optional<Fields> Client::enroll(const RenderedPage& page, const Fields& credentials) {
  Bytes enc = addon_encrypt_fields(credentials);
  if (enc.empty()) return std::nullopt;
  Fields req;
  req.set("page_token", page.page_token);
  req.set("enc_cred", enc);
  return call(wire::kind::kPageEnroll, with_session(std::move(req)), wire::kind::kPageResult);
}

Fields Client::submit_dummy_page(const RenderedPage& page) {
  Fields req;
  req.set("page_token", page.page_token);
  return call(wire::kind::kPageSubmit, with_session(std::move(req)), wire::kind::kPageResult);
}

std::optional<Fields> Client::update(const RenderedPage& page, const Fields& new_credentials) {
  Bytes enc = addon_encrypt_fields(new_credentials);
  if (enc.empty()) return std::nullopt;
  Fields req;
  req.set("page_token", page.page_token);
  req.set("enc_cred", enc);
  return call(wire::kind::kPageUpdate, with_session(std::move(req)), wire::kind::kPageResult);
}

}  // namespace tim::client
