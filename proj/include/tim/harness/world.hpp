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

// One simulated deployment: harness CA, emulated TPM, module images, the
// proxy, target sites and clients on a shared SimNetwork. All randomness
// derives from the world seed, one stream per entity.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tim/client/client.hpp"
#include "tim/crypto/certificate.hpp"
#include "tim/harness/leak_detector.hpp"
#include "tim/harness/sim_network.hpp"
#include "tim/harness/target_site.hpp"
#include "tim/proxy/proxy_service.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::harness {

inline constexpr std::string_view kProxyEndpoint = "proxy";

class World {
 public:
  // Files go to a fresh directory under the system temp dir, removed on
  // destruction.
  explicit World(std::uint64_t seed);
  ~World();

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  std::uint64_t seed() const noexcept { return seed_; }
  const std::filesystem::path& workdir() const noexcept { return workdir_; }

  crypto::CertificateAuthority& ca() { return *ca_; }
  SimNetwork& network() { return network_; }
  tpm::TpmEmulator& tpm() { return *tpm_; }
  proxy::ArtifactStore& artifacts() { return artifacts_; }
  proxy::BootManifest& manifest() { return manifest_; }
  // The service currently answering at the proxy endpoint.
  proxy::ProxyService& proxy() { return *serving_; }
  proxy::ProxyService& genuine_proxy() { return *proxy_; }
  LeakDetector& leaks() { return leaks_; }
  crypto::Rng& attacker_rng() { return *attacker_rng_; }

  proxy::BootReport boot();
  // Platform reset followed by a fresh boot.
  proxy::BootReport reboot();

  // A copy of the proxy code started by an attacker on the same host. It
  // reads the same database and takes over the runtime tables, but holds a
  // proxy key of its own. From now on it answers at the proxy endpoint.
  proxy::ProxyService& start_malicious_copy();

  // `forged` issues the certificate from a CA the proxy does not trust.
  TargetSite& add_site(const std::string& id, bool forged = false);
  TargetSite& site(std::string_view id);
  bool has_site(std::string_view id) const;
  void take_site_down(std::string_view id);

  client::Client& add_client(const std::string& name, const std::string& user_id);
  client::Client& client(std::string_view name);
  bool has_client(std::string_view name) const;

  std::int64_t now() const { return now_.load(); }
  void advance_clock(std::int64_t seconds) { now_ += seconds; }

  std::vector<tpm::PcrEvent> pcr_history() const;

  // Scans the transcript and every file below workdir().
  void final_leak_scan();

 private:
  void observe(proxy::ProxyService& service, const std::string& tag);

  std::uint64_t seed_;
  std::filesystem::path workdir_;
  std::atomic<std::int64_t> now_;
  std::unique_ptr<crypto::Rng> ca_rng_;
  std::unique_ptr<crypto::CertificateAuthority> ca_;
  std::unique_ptr<crypto::Rng> rogue_rng_;
  std::unique_ptr<crypto::CertificateAuthority> rogue_ca_;
  std::unique_ptr<tpm::TpmEmulator> tpm_;
  proxy::ArtifactStore artifacts_;
  proxy::BootManifest manifest_;
  SimNetwork network_;
  LeakDetector leaks_;
  std::unique_ptr<crypto::Rng> proxy_rng_;
  std::unique_ptr<crypto::Rng> attacker_rng_;
  std::unique_ptr<proxy::ProxyService> proxy_;
  std::unique_ptr<proxy::ProxyService> copy_;
  proxy::ProxyService* serving_ = nullptr;
  std::map<std::string, std::unique_ptr<TargetSite>, std::less<>> sites_;
  struct ClientSlot {
    std::unique_ptr<crypto::Rng> rng;
    std::unique_ptr<client::Client> client;
  };
  std::map<std::string, ClientSlot, std::less<>> clients_;
  mutable std::mutex mu_;
  std::vector<tpm::PcrEvent> pcr_history_;
};

}  // namespace tim::harness
