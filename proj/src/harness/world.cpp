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
#include "tim/harness/world.hpp"

#include <unistd.h>

#include "tim/error.hpp"
#include "tim/file_io.hpp"

namespace tim::harness {

namespace {

constexpr std::int64_t kEpoch = 1'000'000;

std::filesystem::path fresh_workdir() {
  static std::atomic<std::uint64_t> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("tim-world-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

proxy::ProxyConfig config_for(const std::filesystem::path& dir, std::string_view flicker_dir) {
  proxy::ProxyConfig c;
  c.listen_address = std::string(kProxyEndpoint);
  c.db_path = dir / "proxy.db";
  c.manifest_path = dir / "boot.manifest";
  c.workdir = dir / flicker_dir;
  return c;
}

}  // namespace

World::World(std::uint64_t seed)
    : seed_(seed),
      workdir_(fresh_workdir()),
      now_(kEpoch),
      ca_rng_(std::make_unique<crypto::Rng>(seed, "ca")),
      ca_(std::make_unique<crypto::CertificateAuthority>(*ca_rng_)),
      rogue_rng_(std::make_unique<crypto::Rng>(seed, "rogue-ca")),
      rogue_ca_(std::make_unique<crypto::CertificateAuthority>(*rogue_rng_)),
      tpm_(std::make_unique<tpm::TpmEmulator>(*ca_, seed)),
      artifacts_(proxy::ArtifactStore::release()),
      manifest_(proxy::BootManifest::release()),
      proxy_rng_(std::make_unique<crypto::Rng>(seed, "proxy")),
      attacker_rng_(std::make_unique<crypto::Rng>(seed, "attacker")) {
  tpm_->set_observer([this](const tpm::PcrEvent& e) {
    std::lock_guard lock(mu_);
    pcr_history_.push_back(e);
  });
  proxy_ = std::make_unique<proxy::ProxyService>(config_for(workdir_, "flicker"), *tpm_, artifacts_, network_,
                                                 ca_->public_key(), *proxy_rng_, [this] { return now(); });
  observe(*proxy_, "proxy");
  serving_ = proxy_.get();
  network_.add_endpoint(std::string(kProxyEndpoint), [this](const wire::Frame& f) { return serving_->handle(f); });
}

World::~World() {
  clients_.clear();
  copy_.reset();
  proxy_.reset();
  std::error_code ec;
  std::filesystem::remove_all(workdir_, ec);
}

void World::observe(proxy::ProxyService& service, const std::string& tag) {
  auto envelopes = std::make_shared<std::atomic<std::uint64_t>>(0);
  service.flicker().set_envelope_observer([this, tag, envelopes](ByteView in, ByteView out) {
    const std::string n = std::to_string((*envelopes)++);
    leaks_.scan(tag + " envelope " + n + " input", in);
    leaks_.scan(tag + " envelope " + n + " output", out);
  });
  auto writes = std::make_shared<std::atomic<std::uint64_t>>(0);
  service.database().set_persist_observer([this, tag, writes](ByteView file) {
    leaks_.scan(tag + " database write " + std::to_string((*writes)++), file);
  });
}

proxy::BootReport World::boot() {
  write_file_atomic(genuine_proxy().config().manifest_path, as_bytes(manifest_.to_text()));
  return proxy_->start(manifest_);
}

proxy::BootReport World::reboot() {
  tpm_->power_cycle();
  return boot();
}

proxy::ProxyService& World::start_malicious_copy() {
  copy_ = std::make_unique<proxy::ProxyService>(config_for(workdir_, "flicker-copy"), *tpm_, artifacts_, network_,
                                                ca_->public_key(), *attacker_rng_, [this] { return now(); });
  observe(*copy_, "copy");
  copy_->resume_from_database();
  copy_->import_runtime(proxy_->export_runtime());
  serving_ = copy_.get();
  return *copy_;
}

TargetSite& World::add_site(const std::string& id, bool forged) {
  if (sites_.count(id)) throw TimError(Errc::usage, "site '" + id + "' exists");
  auto site = std::make_unique<TargetSite>(id, forged ? *rogue_ca_ : *ca_, seed_);
  TargetSite& ref = *site;
  sites_.emplace(id, std::move(site));
  network_.add_endpoint(proxy::site_endpoint(id), [&ref](const wire::Frame& f) { return ref.handle(f); });
  return ref;
}

TargetSite& World::site(std::string_view id) {
  auto it = sites_.find(id);
  if (it == sites_.end()) throw TimError(Errc::usage, "no site '" + std::string(id) + "'");
  return *it->second;
}

bool World::has_site(std::string_view id) const { return sites_.find(id) != sites_.end(); }

void World::take_site_down(std::string_view id) { network_.remove_endpoint(proxy::site_endpoint(id)); }

client::Client& World::add_client(const std::string& name, const std::string& user_id) {
  if (clients_.count(name)) throw TimError(Errc::usage, "client '" + name + "' exists");
  client::ClientProfile profile;
  profile.user_id = user_id;
  profile.proxy_address = std::string(kProxyEndpoint);
  profile.ca_pub = ca_->public_key();
  ClientSlot slot;
  slot.rng = std::make_unique<crypto::Rng>(seed_, "client:" + name);
  slot.client = std::make_unique<client::Client>(std::move(profile), "client:" + name, network_, *slot.rng,
                                                 [this] { return now(); });
  client::Client& ref = *slot.client;
  clients_.emplace(name, std::move(slot));
  return ref;
}

client::Client& World::client(std::string_view name) {
  auto it = clients_.find(name);
  if (it == clients_.end()) throw TimError(Errc::usage, "no client '" + std::string(name) + "'");
  return *it->second.client;
}

bool World::has_client(std::string_view name) const { return clients_.find(name) != clients_.end(); }

std::vector<tpm::PcrEvent> World::pcr_history() const {
  std::lock_guard lock(mu_);
  return pcr_history_;
}

void World::final_leak_scan() {
  leaks_.scan_transcript(network_.transcript());
  leaks_.scan_directory(workdir_);
}

}  // namespace tim::harness
