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
#include "tim/harness/target_site.hpp"

#include "tim/codec.hpp"
#include "tim/error.hpp"
#include "tim/proxy/forms.hpp"
#include "tim/proxy/proxy_service.hpp"

namespace tim::harness {

namespace {

wire::Frame reply(std::string_view kind, const Fields& body) {
  wire::Frame f;
  f.kind = std::string(kind);
  f.body = body.encode();
  return f;
}

wire::Frame error(Errc code, std::string detail, std::string step) {
  return reply(wire::kind::kError, wire::error_body(TimError(code, std::move(detail), std::move(step))));
}

}  // namespace

namespace {

crypto::KeyPair site_key(const std::string& id, std::uint64_t seed) {
  crypto::Rng rng(seed, "site:" + id);
  return crypto::generate_keypair(crypto::KeyPurpose::site, rng);
}

}  // namespace

TargetSite::TargetSite(std::string id, const crypto::CertificateAuthority& issuer, std::uint64_t seed,
                       std::optional<std::uint64_t> nonce_seed)
    : id_(std::move(id)),
      key_(site_key(id_, seed)),
      rng_(nonce_seed.value_or(seed), "site-channel:" + id_),
      cert_(issuer.issue(proxy::site_subject(id_), key_.public_key())) {}

void TargetSite::add_account(std::string username, std::string password) {
  std::lock_guard lock(mu_);
  accounts_[std::move(username)] = std::move(password);
}

std::optional<std::string> TargetSite::password_of(std::string_view username) const {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(username);
  if (it == accounts_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t TargetSite::accepted() const {
  std::lock_guard lock(mu_);
  return accepted_;
}

std::uint64_t TargetSite::rejected() const {
  std::lock_guard lock(mu_);
  return rejected_;
}

std::optional<std::string> TargetSite::last_login() const {
  std::lock_guard lock(mu_);
  return last_login_;
}

wire::Frame TargetSite::handle(const wire::Frame& request) {
  try {
    Fields in = request.fields();
    if (request.kind == wire::kind::kSiteHello) return on_hello(in);
    if (request.kind == wire::kind::kSiteSubmit) return on_submit(in);
    return error(Errc::protocol_violation, "unexpected " + request.kind, "site");
  } catch (const TimError& e) {
    return error(e.code(), e.what(), e.step().empty() ? "site" : e.step());
  }
}

wire::Frame TargetSite::on_hello(const Fields& in) {
  auto kind = proxy::page_kind_from_name(in.get_string("page_kind"));
  if (!kind) return error(Errc::protocol_violation, "unknown page", "site");
  proxy::FormSchema schema;
  if (*kind == proxy::PageKind::login) schema = proxy::login_schema();
  if (*kind == proxy::PageKind::update) schema = proxy::update_schema();
  if (*kind == proxy::PageKind::other) schema = {proxy::PageKind::other, {"query"}, {}, {}};
  Nonce channel = rng_.nonce();
  {
    std::lock_guard lock(mu_);
    open_channels_.insert(channel);
  }
  Fields out;
  out.set("cert", cert_.encode());
  out.set("schema", schema.encode());
  out.set("channel_nonce", channel);
  return reply(wire::kind::kSitePage, out);
}

wire::Frame TargetSite::on_submit(const Fields& in) {
  auto kind = proxy::page_kind_from_name(in.get_string("page_kind"));
  if (!kind) return error(Errc::protocol_violation, "unknown page", "site");
  SecureBytes plain;
  try {
    plain = crypto::decrypt(key_, in.get("enc_form"));
  } catch (const TimError&) {
    return error(Errc::protocol_violation, "form is not encrypted to this site", "site");
  }
  Fields sealed = Fields::decode(plain);
  Fields form = Fields::decode(sealed.get("form"));
  Nonce channel = sealed.get_fixed<Nonce>("channel_nonce");
  sealed.clear();

  bool ok = false;
  {
    std::lock_guard lock(mu_);
    if (open_channels_.erase(channel) == 0) {
      form.clear();
      return error(Errc::replay, "channel already used", "site");
    }
    const std::string user = form.get_string("username");
    const std::string pass = form.get_string("password");
    if (*kind == proxy::PageKind::update) {
      auto it = accounts_.find(form.get_string("old_username"));
      if (it != accounts_.end() && it->second == form.get_string("old_password")) {
        accounts_.erase(it);
        accounts_[user] = pass;
        ok = true;
      }
    } else {
      auto it = accounts_.find(user);
      ok = it != accounts_.end() && it->second == pass;
    }
    if (ok) {
      ++accepted_;
      last_login_ = user;
    } else {
      ++rejected_;
    }
  }
  form.clear();
  Fields out;
  out.set("status", ok ? "accepted" : "rejected");
  return reply(wire::kind::kSiteResult, out);
}

Bytes TargetSite::encode_state() const {
  std::lock_guard lock(mu_);
  Writer w;
  w.u16(static_cast<std::uint16_t>(accounts_.size()));
  for (const auto& [u, p] : accounts_) w.str(u).str(p);
  w.u16(static_cast<std::uint16_t>(open_channels_.size()));
  for (const auto& n : open_channels_) w.fixed(n);
  return std::move(w).bytes();
}

void TargetSite::decode_state(ByteView in) {
  Reader r(in);
  std::map<std::string, std::string, std::less<>> accounts;
  for (std::uint16_t n = r.u16(); n > 0; --n) {
    std::string u = r.str();
    accounts[u] = r.str();
  }
  std::set<Nonce> channels;
  for (std::uint16_t n = r.u16(); n > 0; --n) channels.insert(r.fixed<Nonce>());
  r.expect_done("site state");
  std::lock_guard lock(mu_);
  accounts_ = std::move(accounts);
  open_channels_ = std::move(channels);
}

}  // namespace tim::harness
