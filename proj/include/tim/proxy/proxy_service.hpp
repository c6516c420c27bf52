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

// The proxy module: trusted boot, initial sealing, and the request handlers
// for registration, authentication, enrollment, submission and update.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "tim/crypto/certificate.hpp"
#include "tim/crypto/keys.hpp"
#include "tim/crypto/rng.hpp"
#include "tim/proxy/artifacts.hpp"
#include "tim/proxy/config.hpp"
#include "tim/proxy/database.hpp"
#include "tim/proxy/flicker.hpp"
#include "tim/proxy/forms.hpp"
#include "tim/tpm/emulator.hpp"
#include "tim/wire/frame.hpp"

namespace tim::proxy {

// Seconds on the caller's clock.
using Clock = std::function<std::int64_t()>;

std::string site_endpoint(std::string_view site_id);
std::string site_subject(std::string_view site_id);

// Digests the proxy and client expect as the first three PCR18 measurements.
struct ReferenceMeasurements {
  Digest pal;
  Digest flicker;
  Digest proxy;

  static ReferenceMeasurements release();
};

class ProxyService {
 public:
  ProxyService(ProxyConfig config, tpm::TpmEmulator& tpm, const ArtifactStore& artifacts,
               wire::Transport& network, crypto::PublicKey ca_public, crypto::Rng& rng, Clock clock);
  ~ProxyService();

  ProxyService(const ProxyService&) = delete;
  ProxyService& operator=(const ProxyService&) = delete;

  // Trusted boot against `manifest`, then initial sealing: fresh PM key pair,
  // PCR15 extended with hash(pm_pub), PAL hash check, PAL seals pm_pub.
  // Throws boot_refused or key_provenance and leaves the service stopped.
  BootReport start(const BootManifest& manifest);

  // Starts without trusted boot or initial sealing, reusing the sealed PM
  // public key found in the database. This is what a copy of the proxy that
  // never held the genuine PM private key can do.
  void resume_from_database();

  bool running() const;

  // Network endpoint handler. Failures become "error" frames.
  wire::Frame handle(const wire::Frame& request);

  Flicker& flicker() noexcept { return *flicker_; }
  CredentialDb& database() noexcept { return *db_; }
  const ProxyConfig& config() const noexcept { return config_; }
  std::optional<crypto::PublicKey> pm_public_key() const;

  // Sessions, tunnels and rendered pages, for persisting across CLI runs.
  Bytes export_runtime() const;
  void import_runtime(ByteView state);

  bool session_authenticated(std::string_view token) const;

  // Called with (step label, detail) whenever a request is refused.
  void set_refusal_observer(std::function<void(const TimError&)> observer);

 private:
  struct Tunnel;
  struct Session;
  struct Page;

  Fields on_tunnel_request(const Fields& in);
  Fields on_register(const Fields& in);
  Fields on_authenticate(const Fields& in);
  Fields on_page_visit(const Fields& in);
  Fields on_page_enroll(const Fields& in);
  Fields on_page_submit(const Fields& in);
  Fields on_page_update(const Fields& in);

  Tunnel take_tunnel(const std::string& id, std::string_view purpose, std::string_view step);
  Session checked_session(const Fields& in, std::string_view step);
  Page take_page(const Fields& in, const Session& session, RenderMode mode, std::string_view step);
  Fields credential_decryption(ByteView enc_cred, const tpm::SealedBlob& sealed_pal_priv, const Nonce& nonce);
  void submit_to_site(const Page& page, const Fields& form, std::string_view step_prefix);
  pal::PalEnvelope invoke(pal::PalOption option, Fields payload);
  std::string fresh_token();

  ProxyConfig config_;
  tpm::TpmEmulator& tpm_;
  const ArtifactStore& artifacts_;
  wire::Transport& network_;
  crypto::PublicKey ca_public_;
  crypto::Rng& rng_;
  Clock clock_;
  std::unique_ptr<Flicker> flicker_;
  std::unique_ptr<CredentialDb> db_;

  mutable std::mutex mu_;
  // Serializes read-PAL-write cycles on the sealed pass list.
  std::mutex pass_list_mu_;
  bool running_ = false;
  std::optional<crypto::KeyPair> pm_key_;
  ReferenceMeasurements reference_;
  std::map<std::string, Tunnel, std::less<>> tunnels_;
  std::map<std::string, Session, std::less<>> sessions_;
  std::map<std::string, Page, std::less<>> pages_;
  std::function<void(const TimError&)> refusal_observer_;
};

}  // namespace tim::proxy
