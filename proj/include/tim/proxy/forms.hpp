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

// Form engine. Target sites publish a FormSchema for each page; the proxy
// decides what to render into the page the client sees.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tim/codec.hpp"
#include "tim/crypto/rng.hpp"

namespace tim::proxy {

enum class PageKind : std::uint8_t { login = 1, update = 2, other = 3 };

std::string_view page_kind_name(PageKind kind) noexcept;
std::optional<PageKind> page_kind_from_name(std::string_view name) noexcept;

struct FormSchema {
  PageKind page_kind = PageKind::other;
  std::vector<std::string> field_names;
  std::vector<std::string> credential_fields;
  // Update pages only; old_credential_fields[i] takes the stored value of
  // credential_fields[i].
  std::vector<std::string> old_credential_fields;

  // Throws TimError(schema_violation).
  void validate() const;

  // u8 kind | u16 n, str... for each of the three lists.
  Bytes encode() const;
  static FormSchema decode(ByteView in);

  friend bool operator==(const FormSchema&, const FormSchema&) = default;
};

FormSchema login_schema();
FormSchema update_schema();

// Random placeholder: 16 random bytes as 32 hex chars.
std::string dummy_value(crypto::Rng& rng);

enum class RenderMode : std::uint8_t {
  enroll = 1,  // login page, nothing stored: empty credential fields
  submit = 2,  // login page, stored record: dummies in credential fields
  update = 3,  // update page, stored record: dummies in old credential fields
  plain = 4,   // anything else: passed through
};

std::string_view render_mode_name(RenderMode mode) noexcept;
std::optional<RenderMode> render_mode_from_name(std::string_view name) noexcept;

RenderMode choose_mode(PageKind kind, bool has_record) noexcept;

// Values shown to the client. Non-credential fields and fields the client
// must type are empty.
Fields render_fields(const FormSchema& schema, RenderMode mode, crypto::Rng& rng);

// Builds the form submitted to the target. credentials maps
// credential_fields names to real values; old_credentials (update pages)
// uses the same names and lands in old_credential_fields.
Fields fill_form(const FormSchema& schema, const Fields& credentials, const Fields* old_credentials);

}  // namespace tim::proxy
