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
#include "tim/harness/deployment.hpp"

#include <chrono>
#include <random>

#include "tim/codec.hpp"
#include "tim/error.hpp"
#include "tim/file_io.hpp"

namespace tim::harness {

namespace {

const char* const kSites[] = {"shop", "mail"};

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::int64_t wall_clock() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::filesystem::path f(const std::filesystem::path& dir, const char* name) { return dir / name; }

}  // namespace

void Deployment::init(const std::filesystem::path& dir, const std::string& user_id, std::uint64_t seed) {
  if (std::filesystem::exists(f(dir, "profile.timp")))
    throw TimError(Errc::usage, "state directory already initialized: " + dir.string());
  std::filesystem::create_directories(dir);
  write_file_atomic(f(dir, "seed"), as_bytes(std::to_string(seed)));
  crypto::Rng ca_rng(seed, "ca");
  crypto::CertificateAuthority ca(ca_rng);
  tpm::TpmEmulator tpm(ca, seed);
  tpm.save(f(dir, "tpm.snap"));
  Writer sites;
  for (const char* s : kSites) sites.str(s).blob(TargetSite(s, ca, seed).encode_state());
  write_file_atomic(f(dir, "sites.bin"), sites.bytes());
  client::ClientProfile profile;
  profile.user_id = user_id;
  profile.proxy_address = "proxy";
  profile.ca_pub = ca.public_key();
  profile.save(f(dir, "profile.timp"));
}

Deployment::Deployment(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::exists(f(dir_, "profile.timp")))
    throw TimError(Errc::usage, "no client state in " + dir_.string() + "; run 'tim client init' first");
  seed_ = std::stoull(to_string(read_file(f(dir_, "seed"))));
  ca_rng_ = std::make_unique<crypto::Rng>(seed_, "ca");
  ca_ = std::make_unique<crypto::CertificateAuthority>(*ca_rng_);
  tpm_ = tpm::TpmEmulator::load(f(dir_, "tpm.snap"), entropy_seed());
  tpm_->power_cycle();
  artifacts_ = proxy::ArtifactStore::release();

  proxy::ProxyConfig config;
  config.db_path = f(dir_, "proxy.db");
  config.manifest_path = f(dir_, "boot.manifest");
  config.workdir = f(dir_, "flicker");
  proxy_rng_ = std::make_unique<crypto::Rng>(entropy_seed(), "proxy");
  proxy_ = std::make_unique<proxy::ProxyService>(config, *tpm_, artifacts_, network_, ca_->public_key(), *proxy_rng_,
                                                 wall_clock);
  proxy::BootManifest manifest = proxy::BootManifest::release();
  if (std::filesystem::exists(config.manifest_path))
    manifest = proxy::BootManifest::parse(to_string(read_file(config.manifest_path)));
  else
    write_file_atomic(config.manifest_path, as_bytes(manifest.to_text()));
  proxy_->start(manifest);
  if (std::filesystem::exists(f(dir_, "proxy_runtime.bin"))) proxy_->import_runtime(read_file(f(dir_, "proxy_runtime.bin")));
  network_.add_endpoint("proxy", [this](const wire::Frame& fr) { return proxy_->handle(fr); });

  Bytes sites = read_file(f(dir_, "sites.bin"));
  Reader r(sites);
  while (!r.done()) {
    std::string id = r.str();
    auto site = std::make_unique<TargetSite>(id, *ca_, seed_, entropy_seed());
    site->decode_state(r.blob());
    TargetSite& ref = *site;
    network_.add_endpoint(proxy::site_endpoint(id), [&ref](const wire::Frame& fr) { return ref.handle(fr); });
    sites_.emplace(id, std::move(site));
  }

  client_rng_ = std::make_unique<crypto::Rng>(entropy_seed(), "client");
  client_ = std::make_unique<client::Client>(client::ClientProfile::load(f(dir_, "profile.timp")), "client",
                                             network_, *client_rng_, wall_clock);
  if (std::filesystem::exists(f(dir_, "session.bin")))
    client_->restore_session(client::SessionHandle::decode(read_file(f(dir_, "session.bin"))));
}

Deployment::~Deployment() = default;

TargetSite& Deployment::site(std::string_view id) {
  auto it = sites_.find(id);
  if (it == sites_.end()) throw TimError(Errc::usage, "no site '" + std::string(id) + "'");
  return *it->second;
}

std::optional<client::RenderedPage> Deployment::last_page() const {
  if (!std::filesystem::exists(f(dir_, "page.bin"))) return std::nullopt;
  return client::RenderedPage::decode(read_file(f(dir_, "page.bin")));
}

void Deployment::set_last_page(const client::RenderedPage& page) { write_file_atomic(f(dir_, "page.bin"), page.encode()); }

void Deployment::save() {
  tpm_->save(f(dir_, "tpm.snap"));
  write_file_atomic(f(dir_, "proxy_runtime.bin"), proxy_->export_runtime());
  Writer sites;
  for (const auto& [id, site] : sites_) sites.str(id).blob(site->encode_state());
  write_file_atomic(f(dir_, "sites.bin"), sites.bytes());
  client_->profile().save(f(dir_, "profile.timp"));
  if (client_->session()) write_file_atomic(f(dir_, "session.bin"), client_->session()->encode());
}

}  // namespace tim::harness
