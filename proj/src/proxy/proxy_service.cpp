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
#include "tim/proxy/proxy_service.hpp"

#include "tim/codec.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"
#include "tim/pal/blocks.hpp"
#include "tim/pal/envelope.hpp"

namespace tim::proxy {

namespace fld = pal::field;
using pal::PalEnvelope;
using pal::PalOption;

struct ProxyService::Tunnel {
  std::string purpose;
  crypto::PublicKey pal_pub;
  tpm::SealedBlob sealed_pal_priv;
  Nonce nonce;
};

struct ProxyService::Session {
  std::string token;
  std::string user_id;
  bool authenticated = false;
  // The secure-tunnel key pinned by the client during authentication.
  crypto::PublicKey tunnel_key;
  tpm::SealedBlob sealed_pal_priv;
  Nonce nonce;
  std::int64_t created_at = 0;
  std::int64_t last_used = 0;
};

struct ProxyService::Page {
  std::string session;
  std::string site;
  PageKind kind = PageKind::other;
  RenderMode mode = RenderMode::plain;
  FormSchema schema;
  crypto::Certificate cert;
  Nonce channel_nonce;
};

namespace {

[[noreturn]] void fail(Errc code, std::string message, std::string_view step) {
  throw TimError(code, std::move(message), std::string(step));
}

std::string protocol_of(RenderMode mode) {
  switch (mode) {
    case RenderMode::enroll: return "enrollment";
    case RenderMode::submit: return "submission";
    case RenderMode::update: return "update";
    case RenderMode::plain: return "browse";
  }
  return "browse";
}

}  // namespace

std::string site_endpoint(std::string_view site_id) { return "site:" + std::string(site_id); }
std::string site_subject(std::string_view site_id) { return "site:" + std::string(site_id); }

ReferenceMeasurements ReferenceMeasurements::release() {
  ArtifactStore a = ArtifactStore::release();
  return {a.measure(Module::pal), a.measure(Module::flicker), a.measure(Module::proxy)};
}

ProxyService::ProxyService(ProxyConfig config, tpm::TpmEmulator& tpm, const ArtifactStore& artifacts,
                           wire::Transport& network, crypto::PublicKey ca_public, crypto::Rng& rng, Clock clock)
    : config_(std::move(config)),
      tpm_(tpm),
      artifacts_(artifacts),
      network_(network),
      ca_public_(std::move(ca_public)),
      rng_(rng),
      clock_(std::move(clock)),
      flicker_(std::make_unique<Flicker>(tpm, artifacts, config_.workdir)),
      db_(std::make_unique<CredentialDb>(config_.db_path)),
      reference_(ReferenceMeasurements::release()) {}

ProxyService::~ProxyService() = default;

BootReport ProxyService::start(const BootManifest& manifest) {
  {
    std::lock_guard lock(mu_);
    running_ = false;
    pm_key_.reset();
  }
  BootReport report = trusted_boot(manifest, artifacts_);
  ReferenceMeasurements reference = ReferenceMeasurements::release();
  for (const auto& m : report.modules) {
    if (m.module == "proxy") reference.proxy = m.expected;
    if (m.module == "flicker") reference.flicker = m.expected;
  }

  // Initial sealing. The private half stays in this object only.
  crypto::KeyPair pm = crypto::generate_keypair(crypto::KeyPurpose::proxy, rng_);
  tpm_.extend(tpm::kProxyKeyPcr, "pm-pub", crypto::hash(pm.public_key().encode()));
  Digest pal_digest = artifacts_.measure(Module::pal);
  if (pal_digest != reference.pal) {
    fail(Errc::boot_refused, "module 'pal' measures " + pal_digest.hex() + ", expected " + reference.pal.hex(),
         "initial-sealing.1c");
  }
  Fields in;
  in.set(std::string(fld::kPmPub), pm.public_key().encode());
  PalEnvelope out = invoke(PalOption::initial_sealing, std::move(in));
  db_->set_sealed_pm_pub(tpm::SealedBlob::decode(out.payload.get(fld::kSealedPmPub)));

  std::lock_guard lock(mu_);
  pm_key_ = std::move(pm);
  reference_ = reference;
  running_ = true;
  return report;
}

void ProxyService::resume_from_database() {
  if (!db_->sealed_pm_pub()) throw TimError(Errc::usage, "database holds no sealed proxy key");
  crypto::KeyPair own = crypto::generate_keypair(crypto::KeyPurpose::proxy, rng_);
  std::lock_guard lock(mu_);
  pm_key_ = std::move(own);
  running_ = true;
}

bool ProxyService::running() const {
  std::lock_guard lock(mu_);
  return running_;
}

std::optional<crypto::PublicKey> ProxyService::pm_public_key() const {
  std::lock_guard lock(mu_);
  if (!pm_key_) return std::nullopt;
  return pm_key_->public_key();
}

void ProxyService::set_refusal_observer(std::function<void(const TimError&)> observer) {
  std::lock_guard lock(mu_);
  refusal_observer_ = std::move(observer);
}

std::string ProxyService::fresh_token() { return to_hex(rng_.bytes(16)); }

PalEnvelope ProxyService::invoke(PalOption option, Fields payload) {
  FlickerResult r = flicker_->invoke(PalEnvelope::request(option, std::move(payload)));
  if (!r.output.ok()) throw r.output.error();
  if (r.output.option != option) fail(Errc::protocol_violation, "PAL answered a different option", "flicker.output");
  return std::move(r.output);
}

wire::Frame ProxyService::handle(const wire::Frame& request) {
  wire::Frame reply;
  try {
    if (!running()) fail(Errc::boot_refused, "proxy service is not running", "boot");
    Fields in;
    try {
      in = request.fields();
    } catch (const TimError& e) {
      fail(Errc::protocol_violation, std::string("malformed request: ") + e.what(), "wire");
    }
    namespace k = wire::kind;
    if (request.kind == k::kTunnelRequest) {
      reply.kind = k::kTunnelOffer;
      reply.body = on_tunnel_request(in).encode();
    } else if (request.kind == k::kRegisterSubmit) {
      reply.kind = k::kRegisterDone;
      reply.body = on_register(in).encode();
    } else if (request.kind == k::kAuthSubmit) {
      reply.kind = k::kAuthDone;
      reply.body = on_authenticate(in).encode();
    } else if (request.kind == k::kPageVisit) {
      reply.kind = k::kPageRender;
      reply.body = on_page_visit(in).encode();
    } else if (request.kind == k::kPageEnroll) {
      reply.kind = k::kPageResult;
      reply.body = on_page_enroll(in).encode();
    } else if (request.kind == k::kPageSubmit) {
      reply.kind = k::kPageResult;
      reply.body = on_page_submit(in).encode();
    } else if (request.kind == k::kPageUpdate) {
      reply.kind = k::kPageResult;
      reply.body = on_page_update(in).encode();
    } else {
      fail(Errc::protocol_violation, "unknown message kind '" + request.kind + "'", "wire");
    }
  } catch (const TimError& e) {
    std::function<void(const TimError&)> observer;
    {
      std::lock_guard lock(mu_);
      observer = refusal_observer_;
    }
    if (observer) observer(e);
    reply.kind = wire::kind::kError;
    reply.body = wire::error_body(e).encode();
  } catch (const std::exception& e) {
    reply.kind = wire::kind::kError;
    reply.body = wire::error_body(TimError(Errc::protocol_violation, e.what(), "proxy")).encode();
  }
  return reply;
}

// ---------------------------------------------------------------------------
// Secure tunnel, registration, authentication

Fields ProxyService::on_tunnel_request(const Fields& in) {
  std::string purpose = in.get_string("purpose");
  if (purpose != "register" && purpose != "auth")
    fail(Errc::schema_violation, "unknown tunnel purpose '" + purpose + "'", "secure-tunnel.1a");
  Nonce attest_nonce = in.get_fixed<Nonce>("attest_nonce");

  FlickerResult r = flicker_->invoke(PalEnvelope::request(PalOption::secure_tunnel, {}), attest_nonce);
  if (!r.output.ok()) throw r.output.error();
  Tunnel t{purpose, crypto::PublicKey::decode(r.output.payload.get(fld::kPalPub)),
           tpm::SealedBlob::decode(r.output.payload.get(fld::kSealedPalPriv)),
           r.output.payload.get_fixed<Nonce>(fld::kNonce)};
  std::string id = fresh_token();

  Fields out;
  out.set("tunnel_id", id);
  out.set("pal_pub", t.pal_pub.encode());
  out.set("nonce", t.nonce);
  out.set("quote", r.attestation->quote.encode());
  out.set("sml", r.attestation->sml.encode());
  std::lock_guard lock(mu_);
  tunnels_.emplace(id, std::move(t));
  return out;
}

ProxyService::Tunnel ProxyService::take_tunnel(const std::string& id, std::string_view purpose, std::string_view step) {
  std::lock_guard lock(mu_);
  auto it = tunnels_.find(id);
  if (it == tunnels_.end()) fail(Errc::replay, "secure tunnel unknown or already used", step);
  if (it->second.purpose != purpose) fail(Errc::protocol_violation, "secure tunnel opened for another purpose", step);
  Tunnel t = std::move(it->second);
  tunnels_.erase(it);
  return t;
}

Fields ProxyService::on_register(const Fields& in) {
  Tunnel t = take_tunnel(in.get_string("tunnel_id"), "register", "registration.3b");
  std::lock_guard list_lock(pass_list_mu_);
  Fields payload;
  payload.set(std::string(fld::kEncData), in.get("enc_data"));
  payload.set(std::string(fld::kSealedPalPriv), t.sealed_pal_priv.encode());
  payload.set(std::string(fld::kNonce), t.nonce);
  if (auto list = db_->pass_list()) payload.set(std::string(fld::kSealedPassList), list->encode());
  PalEnvelope out = invoke(PalOption::registration, std::move(payload));
  db_->set_pass_list(tpm::SealedBlob::decode(out.payload.get(fld::kSealedPassList)));
  Fields reply;
  reply.set("otp_params", out.payload.get(fld::kOtpParams));
  return reply;
}

Fields ProxyService::on_authenticate(const Fields& in) {
  Tunnel t = take_tunnel(in.get_string("tunnel_id"), "auth", "authentication.3c");
  std::string user_id = in.get_string("user_id");
  std::lock_guard list_lock(pass_list_mu_);
  auto list = db_->pass_list();
  if (!list) fail(Errc::authentication_refused, "no registered users", "authentication.2b");

  Fields payload;
  payload.set(std::string(fld::kEncData), in.get("enc_data"));
  payload.set(std::string(fld::kSealedPalPriv), t.sealed_pal_priv.encode());
  payload.set(std::string(fld::kNonce), t.nonce);
  payload.set(std::string(fld::kSealedPassList), list->encode());
  payload.set(std::string(fld::kUserId), user_id);
  Nonce attest_nonce = rng_.nonce();
  FlickerResult r = flicker_->invoke(PalEnvelope::request(PalOption::authentication, std::move(payload)), attest_nonce);
  if (!r.output.ok()) throw r.output.error();
  const Bytes& v = r.output.payload.get(fld::kVerdict);
  if (v.size() != 1 || (v[0] != pal::kVerdictAccept && v[0] != pal::kVerdictReject))
    fail(Errc::protocol_violation, "malformed verdict", "authentication.5a");
  const bool verdict = v[0] == pal::kVerdictAccept;

  // The written verdict must be the one the PAL extended into PCR18.
  const Attestation& att = *r.attestation;
  tpm::QuoteVerdict qv = tpm::verify_quote(att.quote, attest_nonce, att.sml, ca_public_);
  if (!qv) fail(Errc::attestation_failure, std::string(tpm::rejection_name(qv.reason)) + ": " + qv.detail, "authentication.6a");
  const auto& e = att.sml.entries;
  ReferenceMeasurements ref;
  {
    std::lock_guard lock(mu_);
    ref = reference_;
  }
  if (att.quote.pcr_index != tpm::kDrtmPcr || e.size() != 4 || e[0].measurement != ref.pal ||
      e[1].measurement != ref.flicker || e[2].measurement != ref.proxy) {
    fail(Errc::attestation_failure, "PCR18 does not hold the expected PAL chain", "authentication.6a");
  }
  if (e[3].measurement != pal::verdict_measurement(verdict))
    fail(Errc::attestation_failure, "PAL output verdict differs from the attested verdict", "authentication.6a");

  if (r.output.payload.has(fld::kSealedPassList))
    db_->set_pass_list(tpm::SealedBlob::decode(r.output.payload.get(fld::kSealedPassList)));
  if (!verdict) {
    auto reason = r.output.payload.find(fld::kReason);
    if (reason && to_string(*reason) == "otp_replay")
      fail(Errc::replay, "one-time password was already used", "authentication.4b");
    fail(Errc::authentication_refused, "user id or password is wrong", "authentication.6b");
  }

  Session s;
  s.token = fresh_token();
  s.user_id = user_id;
  s.authenticated = true;
  s.tunnel_key = t.pal_pub;
  s.sealed_pal_priv = t.sealed_pal_priv;
  s.nonce = t.nonce;
  s.created_at = s.last_used = clock_();
  Fields reply;
  reply.set("session", s.token);
  std::lock_guard lock(mu_);
  sessions_.emplace(s.token, std::move(s));
  return reply;
}

// ---------------------------------------------------------------------------
// Pages

ProxyService::Session ProxyService::checked_session(const Fields& in, std::string_view step) {
  auto token = in.find("session");
  std::lock_guard lock(mu_);
  auto it = token ? sessions_.find(to_string(*token)) : sessions_.end();
  if (it == sessions_.end() || !it->second.authenticated)
    fail(Errc::not_authenticated, "user is not authenticated to the proxy", step);
  const std::int64_t now = clock_();
  if (now - it->second.last_used > config_.session_idle_timeout) {
    sessions_.erase(it);
    fail(Errc::not_authenticated, "session expired", step);
  }
  it->second.last_used = now;
  return it->second;
}

bool ProxyService::session_authenticated(std::string_view token) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(token);
  return it != sessions_.end() && it->second.authenticated &&
         clock_() - it->second.last_used <= config_.session_idle_timeout;
}

Fields ProxyService::on_page_visit(const Fields& in) {
  std::string site = in.get_string("site");
  auto kind = page_kind_from_name(in.get_string("page_kind"));
  if (!kind) fail(Errc::schema_violation, "unknown page kind", "page");
  Session session = checked_session(in, *kind == PageKind::update ? "update.2a" : "submission.2a");

  const bool has_record = db_->find(session.user_id, site).has_value();
  const RenderMode mode = choose_mode(*kind, has_record);
  const std::string proto = protocol_of(mode);

  Fields hello;
  hello.set("page_kind", page_kind_name(*kind));
  Fields page_in;
  try {
    page_in = wire::request(network_, config_.listen_address, site_endpoint(site), wire::kind::kSiteHello, hello,
                            wire::kind::kSitePage);
  } catch (const TimError& e) {
    fail(e.code(), e.what(), proto + ".4a");
  }
  crypto::Certificate cert;
  try {
    cert = crypto::Certificate::decode(page_in.get("cert"));
  } catch (const TimError& e) {
    fail(Errc::certificate_rejected, std::string("unreadable certificate: ") + e.what(), proto + ".4a");
  }
  if (!crypto::verify_certificate(cert, ca_public_) || cert.subject != site_subject(site))
    fail(Errc::certificate_rejected, "target certificate for '" + site + "' does not verify", proto + ".4a");
  FormSchema schema = FormSchema::decode(page_in.get("schema"));
  if (schema.page_kind != *kind) fail(Errc::protocol_violation, "site served a different page kind", proto + ".5a");

  Page page{session.token, site, *kind, mode, schema, cert, page_in.get_fixed<Nonce>("channel_nonce")};
  std::string token = fresh_token();
  Fields out;
  out.set("page_token", token);
  out.set("site", site);
  out.set("page_kind", page_kind_name(*kind));
  out.set("mode", render_mode_name(mode));
  out.set("schema", schema.encode());
  out.set("fields", render_fields(schema, mode, rng_).encode());
  std::lock_guard lock(mu_);
  pages_.emplace(token, std::move(page));
  return out;
}

ProxyService::Page ProxyService::take_page(const Fields& in, const Session& session, RenderMode mode,
                                           std::string_view step) {
  std::lock_guard lock(mu_);
  auto it = pages_.find(in.get_string("page_token"));
  if (it == pages_.end()) fail(Errc::replay, "page token unknown or already used", step);
  if (it->second.session != session.token) fail(Errc::protocol_violation, "page belongs to another session", step);
  if (it->second.mode != mode) {
    Errc code = it->second.mode == RenderMode::plain ? Errc::no_record : Errc::protocol_violation;
    fail(code, "page was rendered for " + std::string(render_mode_name(it->second.mode)), step);
  }
  Page p = std::move(it->second);
  pages_.erase(it);
  return p;
}

Fields ProxyService::credential_decryption(ByteView enc_cred, const tpm::SealedBlob& sealed_pal_priv,
                                           const Nonce& nonce) {
  auto sealed_pm_pub = db_->sealed_pm_pub();
  if (!sealed_pm_pub) fail(Errc::credential_access_denied, "no sealed proxy key", "credential-decryption.2b");
  const Nonce nonce_prime = rng_.nonce();
  Fields payload;
  payload.set(std::string(fld::kEncCred), enc_cred);
  payload.set(std::string(fld::kSealedPalPriv), sealed_pal_priv.encode());
  payload.set(std::string(fld::kNonce), nonce);
  payload.set(std::string(fld::kSealedPmPub), sealed_pm_pub->encode());
  payload.set(std::string(fld::kNoncePrime), nonce_prime);
  PalEnvelope out = invoke(PalOption::credential_decryption, std::move(payload));

  SecureBytes plain;
  {
    std::lock_guard lock(mu_);
    try {
      plain = crypto::decrypt(*pm_key_, out.payload.get(fld::kEncCredWithPm));
    } catch (const TimError&) {
      fail(Errc::credential_access_denied, "PAL output is not encrypted to this proxy's key",
           "credential-decryption.5a");
    }
  }
  Fields inner = Fields::decode(plain);
  Nonce got = inner.get_fixed<Nonce>(fld::kNoncePrime);
  if (got != nonce_prime) {
    inner.clear();
    fail(Errc::replay, "nonce' of the PAL output is not the one just sent", "credential-decryption.5b");
  }
  Fields credentials = Fields::decode(inner.get(fld::kCredentials));
  inner.clear();
  return credentials;
}

void ProxyService::submit_to_site(const Page& page, const Fields& form, std::string_view step) {
  Fields sealed;
  sealed.set("channel_nonce", page.channel_nonce);
  sealed.set("form", form.encode_secure());
  SecureBytes plain = sealed.encode_secure();
  sealed.clear();
  Fields body;
  body.set("page_kind", page_kind_name(page.kind));
  body.set("enc_form", crypto::encrypt(page.cert.public_key, plain, rng_));
  Fields result;
  try {
    result = wire::request(network_, config_.listen_address, site_endpoint(page.site), wire::kind::kSiteSubmit, body,
                           wire::kind::kSiteResult);
  } catch (const TimError& e) {
    fail(e.code(), e.what(), step);
  }
  if (result.get_string("status") != "accepted")
    fail(Errc::target_rejected, "target refused the submitted credentials", step);
}

Fields ProxyService::on_page_enroll(const Fields& in) {
  Session session = checked_session(in, "enrollment.2a");
  Page page = take_page(in, session, RenderMode::enroll, "enrollment.10a");
  const Bytes& enc_cred = in.get("enc_cred");
  if (enc_cred.empty()) fail(Errc::schema_violation, "no encrypted credentials", "enrollment.10a");

  Fields credentials = credential_decryption(enc_cred, session.sealed_pal_priv, session.nonce);
  Fields form;
  try {
    form = fill_form(page.schema, credentials, nullptr);
    submit_to_site(page, form, "enrollment.14a");
  } catch (...) {
    credentials.clear();
    form.clear();
    throw;
  }
  credentials.clear();
  form.clear();

  CredentialRecord rec{session.user_id, page.site, enc_cred, session.sealed_pal_priv, session.nonce, page.schema};
  try {
    db_->insert(rec);
  } catch (const TimError& e) {
    fail(Errc::protocol_violation, e.what(), "enrollment.15a");
  }
  Fields out;
  out.set("status", "authenticated");
  out.set("site", page.site);
  return out;
}

Fields ProxyService::on_page_submit(const Fields& in) {
  Session session = checked_session(in, "submission.2a");
  Page page = take_page(in, session, RenderMode::submit, "submission.9a");
  auto rec = db_->find(session.user_id, page.site);
  if (!rec) fail(Errc::no_record, "no stored credentials for this site", "submission.10a");

  Fields credentials = credential_decryption(rec->enc_cred_with_pal, rec->sealed_pal_priv, rec->nonce);
  Fields form;
  try {
    form = fill_form(page.schema, credentials, nullptr);
    submit_to_site(page, form, "submission.13a");
  } catch (...) {
    credentials.clear();
    form.clear();
    throw;
  }
  credentials.clear();
  form.clear();
  Fields out;
  out.set("status", "authenticated");
  out.set("site", page.site);
  return out;
}

Fields ProxyService::on_page_update(const Fields& in) {
  Session session = checked_session(in, "update.2a");
  Page page = take_page(in, session, RenderMode::update, "update.11a");
  const Bytes& enc_new = in.get("enc_cred");
  if (enc_new.empty()) fail(Errc::schema_violation, "no encrypted credentials", "update.11a");

  Fields fresh = credential_decryption(enc_new, session.sealed_pal_priv, session.nonce);
  Fields old;
  Fields form;
  std::optional<CredentialRecord> rec;
  try {
    rec = db_->find(session.user_id, page.site);
    if (!rec) fail(Errc::no_record, "no stored credentials for this site", "update.13a");
    old = credential_decryption(rec->enc_cred_with_pal, rec->sealed_pal_priv, rec->nonce);
    form = fill_form(page.schema, fresh, &old);
    submit_to_site(page, form, "update.16a");
  } catch (...) {
    fresh.clear();
    old.clear();
    form.clear();
    throw;
  }
  fresh.clear();
  old.clear();
  form.clear();

  rec->enc_cred_with_pal = enc_new;
  rec->sealed_pal_priv = session.sealed_pal_priv;
  rec->nonce = session.nonce;
  db_->replace(*rec);
  Fields out;
  out.set("status", "updated");
  out.set("site", page.site);
  return out;
}

// ---------------------------------------------------------------------------
// Runtime state

Bytes ProxyService::export_runtime() const {
  std::lock_guard lock(mu_);
  Writer w;
  w.raw(as_bytes("TIMR")).u16(1);
  w.u32(static_cast<std::uint32_t>(tunnels_.size()));
  for (const auto& [id, t] : tunnels_)
    w.str(id).str(t.purpose).blob(t.pal_pub.encode()).blob(t.sealed_pal_priv.encode()).fixed(t.nonce);
  w.u32(static_cast<std::uint32_t>(sessions_.size()));
  for (const auto& [id, s] : sessions_) {
    w.str(id).str(s.user_id).u8(s.authenticated ? 1 : 0).blob(s.tunnel_key.encode());
    w.blob(s.sealed_pal_priv.encode()).fixed(s.nonce);
    w.u64(static_cast<std::uint64_t>(s.created_at)).u64(static_cast<std::uint64_t>(s.last_used));
  }
  w.u32(static_cast<std::uint32_t>(pages_.size()));
  for (const auto& [id, p] : pages_) {
    w.str(id).str(p.session).str(p.site).u8(static_cast<std::uint8_t>(p.kind)).u8(static_cast<std::uint8_t>(p.mode));
    w.blob(p.schema.encode()).blob(p.cert.encode()).fixed(p.channel_nonce);
  }
  return std::move(w).bytes();
}

void ProxyService::import_runtime(ByteView state) {
  Reader r(state);
  if (to_string(r.raw(4)) != "TIMR" || r.u16() != 1) throw TimError(Errc::format_error, "not a proxy runtime file");
  std::map<std::string, Tunnel, std::less<>> tunnels;
  std::map<std::string, Session, std::less<>> sessions;
  std::map<std::string, Page, std::less<>> pages;
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    std::string id = r.str();
    Tunnel t;
    t.purpose = r.str();
    t.pal_pub = crypto::PublicKey::decode(r.blob());
    t.sealed_pal_priv = tpm::SealedBlob::decode(r.blob());
    t.nonce = r.fixed<Nonce>();
    tunnels.emplace(std::move(id), std::move(t));
  }
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    Session s;
    s.token = r.str();
    s.user_id = r.str();
    s.authenticated = r.u8() == 1;
    s.tunnel_key = crypto::PublicKey::decode(r.blob());
    s.sealed_pal_priv = tpm::SealedBlob::decode(r.blob());
    s.nonce = r.fixed<Nonce>();
    s.created_at = static_cast<std::int64_t>(r.u64());
    s.last_used = static_cast<std::int64_t>(r.u64());
    std::string id = s.token;
    sessions.emplace(std::move(id), std::move(s));
  }
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    std::string id = r.str();
    Page p;
    p.session = r.str();
    p.site = r.str();
    std::uint8_t kind = r.u8();
    std::uint8_t mode = r.u8();
    if (kind < 1 || kind > 3 || mode < 1 || mode > 4) throw TimError(Errc::format_error, "bad page state");
    p.kind = static_cast<PageKind>(kind);
    p.mode = static_cast<RenderMode>(mode);
    p.schema = FormSchema::decode(r.blob());
    p.cert = crypto::Certificate::decode(r.blob());
    p.channel_nonce = r.fixed<Nonce>();
    pages.emplace(std::move(id), std::move(p));
  }
  r.expect_done("proxy runtime");
  std::lock_guard lock(mu_);
  tunnels_ = std::move(tunnels);
  sessions_ = std::move(sessions);
  pages_ = std::move(pages);
}

}  // namespace tim::proxy
