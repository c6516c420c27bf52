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
#include "tim/pal/image.hpp"

#include <string>

#include "tim/build_manifest.hpp"

namespace tim::pal {

std::string_view module_name(Module m) noexcept {
  switch (m) {
    case Module::pal: return "pal";
    case Module::flicker: return "flicker";
    case Module::proxy: return "proxy";
  }
  return "unknown";
}

Bytes release_image(Module m) {
  std::string_view source;
  switch (m) {
    case Module::pal: source = build::kPalSourceSha1; break;
    case Module::flicker: source = build::kFlickerSourceSha1; break;
    case Module::proxy: source = build::kProxySourceSha1; break;
  }
  std::string d = "tim-module/v1\nname=";
  d += module_name(m);
  d += "\nversion=";
  d += build::kReleaseVersion;
  d += "\nsource-sha1=";
  d += source;
  d += "\n";
  return to_bytes(d);
}

std::string_view release_version() noexcept { return build::kReleaseVersion; }

}  // namespace tim::pal
