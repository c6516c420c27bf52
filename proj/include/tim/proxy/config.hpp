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
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tim::proxy {

// Text config, one "key = value" per line, '#' comments:
//   listen_address = proxy
//   db_path = /var/lib/tim/credentials.db
//   manifest_path = /etc/tim/boot.manifest
//   workdir = /var/lib/tim/flicker
//   session_idle_timeout = 1800      (seconds)
struct ProxyConfig {
  std::string listen_address = "proxy";
  std::filesystem::path db_path = "credentials.db";
  std::filesystem::path manifest_path = "boot.manifest";
  std::filesystem::path workdir = "flicker";
  std::int64_t session_idle_timeout = 30 * 60;

  std::string to_text() const;
  // Unknown keys and malformed values throw TimError(format_error).
  static ProxyConfig parse(std::string_view text);
  static ProxyConfig load(const std::filesystem::path& path);
};

}  // namespace tim::proxy
