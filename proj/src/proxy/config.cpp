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
#include "tim/proxy/config.hpp"

#include <charconv>
#include <sstream>

#include "tim/error.hpp"
#include "tim/file_io.hpp"

namespace tim::proxy {
namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string ProxyConfig::to_text() const {
  std::ostringstream out;
  out << "listen_address = " << listen_address << "\n"
      << "db_path = " << db_path.string() << "\n"
      << "manifest_path = " << manifest_path.string() << "\n"
      << "workdir = " << workdir.string() << "\n"
      << "session_idle_timeout = " << session_idle_timeout << "\n";
  return out.str();
}

ProxyConfig ProxyConfig::parse(std::string_view text) {
  ProxyConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw TimError(Errc::format_error, "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "listen_address") {
      c.listen_address = value;
    } else if (key == "db_path") {
      c.db_path = value;
    } else if (key == "manifest_path") {
      c.manifest_path = value;
    } else if (key == "workdir") {
      c.workdir = value;
    } else if (key == "session_idle_timeout") {
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), c.session_idle_timeout);
      if (ec != std::errc{} || p != value.data() + value.size() || c.session_idle_timeout <= 0)
        throw TimError(Errc::format_error, "config line " + std::to_string(lineno) + ": bad timeout");
    } else {
      throw TimError(Errc::format_error, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (c.listen_address.empty()) throw TimError(Errc::format_error, "listen_address is empty");
  return c;
}

ProxyConfig ProxyConfig::load(const std::filesystem::path& path) {
  Bytes b = read_file(path);
  return parse(to_string(b));
}

}  // namespace tim::proxy
