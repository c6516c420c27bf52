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

// A deployment kept in a state directory so the command-line client can run
// one protocol step per invocation. Each invocation is a fresh boot of the
// proxy host: the TPM and database persist, the proxy key does not.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "tim/client/client.hpp"
#include "tim/harness/sim_network.hpp"
#include "tim/harness/target_site.hpp"
#include "tim/proxy/proxy_service.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::harness {

class Deployment {
 public:
  // Creates the state directory with sites "shop" and "mail".
  static void init(const std::filesystem::path& dir, const std::string& user_id, std::uint64_t seed);

  // Loads the state and boots the proxy.
  explicit Deployment(std::filesystem::path dir);
  ~Deployment();

  client::Client& client() { return *client_; }
  TargetSite& site(std::string_view id);

  // Last page returned by visit.
  std::optional<client::RenderedPage> last_page() const;
  void set_last_page(const client::RenderedPage& page);

  // Writes TPM, proxy runtime tables, site accounts, profile and session.
  void save();

 private:
  std::filesystem::path dir_;
  std::uint64_t seed_ = 0;
  std::unique_ptr<crypto::Rng> ca_rng_;
  std::unique_ptr<crypto::CertificateAuthority> ca_;
  std::unique_ptr<tpm::TpmEmulator> tpm_;
  proxy::ArtifactStore artifacts_;
  SimNetwork network_;
  std::unique_ptr<crypto::Rng> proxy_rng_;
  std::unique_ptr<proxy::ProxyService> proxy_;
  std::map<std::string, std::unique_ptr<TargetSite>, std::less<>> sites_;
  std::unique_ptr<crypto::Rng> client_rng_;
  std::unique_ptr<client::Client> client_;
};

}  // namespace tim::harness
