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

// Behavioural stub of a target web server: serves a login and an update
// page over a certificate-authenticated channel and checks submitted
// credentials against its accounts.

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "tim/crypto/certificate.hpp"
#include "tim/crypto/keys.hpp"
#include "tim/crypto/rng.hpp"
#include "tim/wire/frame.hpp"

namespace tim::harness {

class TargetSite {
 public:
  // The certificate names "site:<id>" and is issued by `issuer`. The site key
  // derives from `seed`; channel nonces from `nonce_seed`, default `seed`.
  TargetSite(std::string id, const crypto::CertificateAuthority& issuer, std::uint64_t seed,
             std::optional<std::uint64_t> nonce_seed = std::nullopt);

  void add_account(std::string username, std::string password);
  std::optional<std::string> password_of(std::string_view username) const;

  // site.hello -> site.page, site.submit -> site.result.
  wire::Frame handle(const wire::Frame& request);

  const std::string& id() const noexcept { return id_; }
  const crypto::Certificate& certificate() const noexcept { return cert_; }
  std::uint64_t accepted() const;
  std::uint64_t rejected() const;
  std::optional<std::string> last_login() const;

  // Accounts and open channels: u16 n, per account str username, str
  // password; u16 m, per channel 20 nonce.
  Bytes encode_state() const;
  void decode_state(ByteView in);

 private:
  wire::Frame on_hello(const Fields& in);
  wire::Frame on_submit(const Fields& in);

  std::string id_;
  crypto::KeyPair key_;
  crypto::Rng rng_;
  crypto::Certificate cert_;
  mutable std::mutex mu_;
  std::map<std::string, std::string, std::less<>> accounts_;
  std::set<Nonce> open_channels_;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
  std::optional<std::string> last_login_;
};

}  // namespace tim::harness
