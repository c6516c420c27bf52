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
#include "tim/proxy/artifacts.hpp"

#include <sstream>

#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"

namespace tim::proxy {

ArtifactStore ArtifactStore::release() {
  ArtifactStore s;
  s.pal_ = pal::release_image(Module::pal);
  s.flicker_ = pal::release_image(Module::flicker);
  s.proxy_ = pal::release_image(Module::proxy);
  return s;
}

ArtifactStore::ArtifactStore(const ArtifactStore& other) {
  std::lock_guard lock(other.mu_);
  pal_ = other.pal_;
  flicker_ = other.flicker_;
  proxy_ = other.proxy_;
}

ArtifactStore& ArtifactStore::operator=(const ArtifactStore& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  pal_ = other.pal_;
  flicker_ = other.flicker_;
  proxy_ = other.proxy_;
  return *this;
}

Bytes ArtifactStore::get(Module m) const {
  std::lock_guard lock(mu_);
  switch (m) {
    case Module::pal: return pal_;
    case Module::flicker: return flicker_;
    case Module::proxy: return proxy_;
  }
  return {};
}

void ArtifactStore::set(Module m, Bytes image) {
  std::lock_guard lock(mu_);
  switch (m) {
    case Module::pal: pal_ = std::move(image); break;
    case Module::flicker: flicker_ = std::move(image); break;
    case Module::proxy: proxy_ = std::move(image); break;
  }
}

Digest ArtifactStore::measure(Module m) const { return crypto::hash(get(m)); }

BootManifest BootManifest::release() {
  ArtifactStore a = ArtifactStore::release();
  return {{{"proxy", a.measure(Module::proxy)}, {"flicker", a.measure(Module::flicker)}}};
}

std::string BootManifest::to_text() const {
  std::string out;
  for (const auto& e : entries) out += e.module + " " + e.expected.hex() + "\n";
  return out;
}

BootManifest BootManifest::parse(std::string_view text) {
  BootManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string module, digest, extra;
    fields >> module >> digest;
    if (module.empty() || digest.empty() || (fields >> extra))
      throw TimError(Errc::format_error, "bad manifest line: " + line);
    m.entries.push_back({module, Digest::from_hex(digest)});
  }
  if (m.entries.empty()) throw TimError(Errc::format_error, "empty boot manifest");
  return m;
}

BootReport trusted_boot(const BootManifest& manifest, const ArtifactStore& artifacts) {
  BootReport report;
  for (const auto& e : manifest.entries) {
    Module m;
    if (e.module == "proxy") {
      m = Module::proxy;
    } else if (e.module == "flicker") {
      m = Module::flicker;
    } else if (e.module == "pal") {
      m = Module::pal;
    } else {
      throw TimError(Errc::format_error, "manifest names unknown module '" + e.module + "'");
    }
    Digest measured = artifacts.measure(m);
    if (measured != e.expected) {
      throw TimError(Errc::boot_refused,
                     "module '" + e.module + "' measures " + measured.hex() + ", manifest expects " +
                         e.expected.hex(),
                     "boot.measure");
    }
    report.modules.push_back({e.module, e.expected, measured});
  }
  return report;
}

}  // namespace tim::proxy
