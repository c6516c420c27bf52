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
#include "tim/proxy/forms.hpp"

#include <algorithm>
#include <set>

#include "tim/error.hpp"

namespace tim::proxy {
namespace {

void bad(const std::string& what) { throw TimError(Errc::schema_violation, what); }

void write_list(Writer& w, const std::vector<std::string>& v) {
  w.u16(static_cast<std::uint16_t>(v.size()));
  for (const auto& s : v) w.str(s);
}

std::vector<std::string> read_list(Reader& r) {
  std::vector<std::string> v(r.u16());
  for (auto& s : v) s = r.str();
  return v;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::string_view page_kind_name(PageKind kind) noexcept {
  switch (kind) {
    case PageKind::login: return "login";
    case PageKind::update: return "update";
    case PageKind::other: return "other";
  }
  return "other";
}

std::optional<PageKind> page_kind_from_name(std::string_view name) noexcept {
  if (name == "login") return PageKind::login;
  if (name == "update") return PageKind::update;
  if (name == "other") return PageKind::other;
  return std::nullopt;
}

void FormSchema::validate() const {
  std::set<std::string> names(field_names.begin(), field_names.end());
  if (names.size() != field_names.size()) bad("duplicate form field");
  for (const auto& f : credential_fields)
    if (!names.count(f)) bad("credential field '" + f + "' is not a form field");
  for (const auto& f : old_credential_fields) {
    if (!names.count(f)) bad("old credential field '" + f + "' is not a form field");
    if (contains(credential_fields, f)) bad("field '" + f + "' is both old and new credential");
  }
  if (page_kind != PageKind::other && credential_fields.empty()) bad("page has no credential fields");
  if (page_kind == PageKind::update) {
    if (old_credential_fields.size() != credential_fields.size())
      bad("update page needs one old field per credential field");
  } else if (!old_credential_fields.empty()) {
    bad("old credential fields on a non-update page");
  }
}

Bytes FormSchema::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(page_kind));
  write_list(w, field_names);
  write_list(w, credential_fields);
  write_list(w, old_credential_fields);
  return std::move(w).bytes();
}

FormSchema FormSchema::decode(ByteView in) {
  Reader r(in);
  FormSchema s;
  std::uint8_t kind = r.u8();
  if (kind < 1 || kind > 3) throw TimError(Errc::format_error, "bad page kind");
  s.page_kind = static_cast<PageKind>(kind);
  s.field_names = read_list(r);
  s.credential_fields = read_list(r);
  s.old_credential_fields = read_list(r);
  r.expect_done("form schema");
  s.validate();
  return s;
}

FormSchema login_schema() {
  return {PageKind::login, {"password", "username"}, {"username", "password"}, {}};
}

FormSchema update_schema() {
  return {PageKind::update,
          {"old_password", "old_username", "password", "username"},
          {"username", "password"},
          {"old_username", "old_password"}};
}

std::string dummy_value(crypto::Rng& rng) { return to_hex(rng.bytes(16)); }

std::string_view render_mode_name(RenderMode mode) noexcept {
  switch (mode) {
    case RenderMode::enroll: return "enroll";
    case RenderMode::submit: return "submit";
    case RenderMode::update: return "update";
    case RenderMode::plain: return "plain";
  }
  return "plain";
}

std::optional<RenderMode> render_mode_from_name(std::string_view name) noexcept {
  for (RenderMode m : {RenderMode::enroll, RenderMode::submit, RenderMode::update, RenderMode::plain})
    if (render_mode_name(m) == name) return m;
  return std::nullopt;
}

RenderMode choose_mode(PageKind kind, bool has_record) noexcept {
  if (kind == PageKind::login) return has_record ? RenderMode::submit : RenderMode::enroll;
  if (kind == PageKind::update && has_record) return RenderMode::update;
  return RenderMode::plain;
}

Fields render_fields(const FormSchema& schema, RenderMode mode, crypto::Rng& rng) {
  Fields out;
  for (const auto& name : schema.field_names) {
    bool dummy = (mode == RenderMode::submit && contains(schema.credential_fields, name)) ||
                 (mode == RenderMode::update && contains(schema.old_credential_fields, name));
    out.set(name, dummy ? dummy_value(rng) : std::string());
  }
  return out;
}

Fields fill_form(const FormSchema& schema, const Fields& credentials, const Fields* old_credentials) {
  Fields form;
  for (const auto& name : schema.field_names) form.set(name, std::string_view{});
  for (const auto& name : schema.credential_fields) form.set(name, credentials.get(name));
  if (old_credentials) {
    for (std::size_t i = 0; i < schema.old_credential_fields.size(); ++i)
      form.set(schema.old_credential_fields[i], old_credentials->get(schema.credential_fields[i]));
  }
  return form;
}

}  // namespace tim::proxy
