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

// Measured module images as the proxy host currently holds them, plus the
// trusted-boot manifest that pins the proxy and Flicker images.

#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "tim/bytes.hpp"
#include "tim/pal/image.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::proxy {

using pal::Module;

// The on-disk module images. The harness rewrites them to simulate tampering.
class ArtifactStore {
 public:
  // The release images of this build.
  static ArtifactStore release();

  ArtifactStore() = default;
  ArtifactStore(const ArtifactStore& other);
  ArtifactStore& operator=(const ArtifactStore& other);

  Bytes get(Module m) const;
  void set(Module m, Bytes image);
  Digest measure(Module m) const;

 private:
  mutable std::mutex mu_;
  Bytes pal_;
  Bytes flicker_;
  Bytes proxy_;
};

struct ManifestEntry {
  std::string module;
  Digest expected;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Text form, one entry per line: "<module> <40 hex digest>".
struct BootManifest {
  std::vector<ManifestEntry> entries;

  // proxy and flicker digests of the release images.
  static BootManifest release();

  std::string to_text() const;
  // Throws TimError(format_error).
  static BootManifest parse(std::string_view text);

  friend bool operator==(const BootManifest&, const BootManifest&) = default;
};

struct MeasuredModule {
  std::string module;
  Digest expected;
  Digest measured;
};

struct BootReport {
  std::vector<MeasuredModule> modules;
};

// Measures every manifest module and compares it with its expected digest.
// Throws TimError(boot_refused, ..., "boot.measure") naming the first
// mismatching module.
BootReport trusted_boot(const BootManifest& manifest, const ArtifactStore& artifacts);

}  // namespace tim::proxy
