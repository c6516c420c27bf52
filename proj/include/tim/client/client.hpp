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

// User-side software: tunnel attestation and key pinning, registration and
// authentication drivers, the browser add-on role and OTP generation.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tim/codec.hpp"
#include "tim/crypto/keys.hpp"
#include "tim/crypto/rng.hpp"
#include "tim/otp/otp.hpp"
#include "tim/pal/blocks.hpp"
#include "tim/proxy/forms.hpp"
#include "tim/proxy/proxy_service.hpp"
#include "tim/wire/frame.hpp"

namespace tim::client {

using proxy::Clock;
using proxy::FormSchema;
using proxy::PageKind;
using proxy::ReferenceMeasurements;
using proxy::RenderMode;

// A PAL key the client has seen attested. Credentials are only ever
// encrypted to a pinned key.
struct PinnedTunnel {
  std::string tunnel_id;
  crypto::PublicKey pal_pub;
  Nonce nonce;
  std::int64_t established_at = 0;

  Bytes encode() const;
  static PinnedTunnel decode(ByteView in);
  friend bool operator==(const PinnedTunnel&, const PinnedTunnel&) = default;
};

struct ClientProfile {
  std::string user_id;
  std::optional<otp::OtpParams> otp_params;
  // Index of the next unused chain element.
  std::uint32_t otp_cursor = 0;
  std::string proxy_address = "proxy";
  crypto::PublicKey ca_pub;

  // "TIMP" | u16 version (1) | str user | u8 has_otp [str line] | u32 cursor |
  // str proxy | blob ca.
  Bytes encode() const;
  static ClientProfile decode(ByteView in);
  void save(const std::filesystem::path& path) const;
  static ClientProfile load(const std::filesystem::path& path);
  friend bool operator==(const ClientProfile&, const ClientProfile&) = default;
};

// An authenticated proxy session and the tunnel key pinned while opening it.
struct SessionHandle {
  std::string token;
  PinnedTunnel tunnel;

  Bytes encode() const;
  static SessionHandle decode(ByteView in);
};

// A page as the proxy returned it; credential fields hold dummies or nothing.
struct RenderedPage {
  std::string page_token;
  std::string site;
  PageKind kind = PageKind::other;
  RenderMode mode = RenderMode::plain;
  FormSchema schema;
  Fields fields;

  Bytes encode() const;
  static RenderedPage decode(ByteView in);
};

class Client {
 public:
  Client(ClientProfile profile, std::string endpoint, wire::Transport& network, crypto::Rng& rng, Clock clock,
         ReferenceMeasurements reference = ReferenceMeasurements::release());

  // Opens a tunnel for `purpose` ("register" or "auth") and verifies the
  // attestation: quote against a fresh nonce, the PCR18 chain against the
  // reference measurements, and the last log entry against
  // tunnel_binding(pal_pub, nonce).
  PinnedTunnel establish_tunnel(std::string_view purpose);

  // Sends {user_id, master_password, secret_phrase} to the PAL and stores the
  // returned OTP parameters with a fresh cursor.
  otp::OtpParams register_user(std::string_view master_password, std::string_view secret_phrase);

  // The OTP list for the stored parameters, in order of use.
  std::vector<std::string> otp_list(std::string_view secret_phrase) const;

  const SessionHandle& authenticate(std::string_view password, pal::PasswordKind kind);
  // Uses the chain element at the cursor. The cursor advances before the
  // password is sent, so a password is never offered twice.
  const SessionHandle& authenticate_with_otp(std::string_view secret_phrase);

  RenderedPage visit(std::string_view site, PageKind kind);

  // Canonical Fields encoding of `credentials` encrypted to the pinned key.
  // Returns an empty result for empty input. Throws not_authenticated when
  // no verified tunnel is pinned.
  Bytes addon_encrypt_fields(const Fields& credentials);

  // Each returns the proxy's page.result, or nullopt when there was nothing
  // to send.
  std::optional<Fields> enroll(const RenderedPage& page, const Fields& credentials);
  Fields submit_dummy_page(const RenderedPage& page);
  std::optional<Fields> update(const RenderedPage& page, const Fields& new_credentials);

  const ClientProfile& profile() const noexcept { return profile_; }
  const std::optional<SessionHandle>& session() const noexcept { return session_; }
  void restore_session(SessionHandle session) { session_ = std::move(session); }
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  Fields call(std::string_view kind, const Fields& body, std::string_view expected);
  Fields with_session(Fields body) const;

  ClientProfile profile_;
  std::string endpoint_;
  wire::Transport& network_;
  crypto::Rng& rng_;
  Clock clock_;
  ReferenceMeasurements reference_;
  std::optional<SessionHandle> session_;
};

}  // namespace tim::client
