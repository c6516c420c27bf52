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

#include "tim/bytes.hpp"

#include <openssl/crypto.h>

#include <array>

#include "tim/error.hpp"

namespace tim {

void secure_wipe(void* data, std::size_t size) noexcept {
  if (data != nullptr && size != 0) OPENSSL_cleanse(data, size);
}

std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (std::uint8_t v : b) {
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw TimError(Errc::format_error, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw TimError(Errc::format_error, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

bool constant_time_equal(ByteView a, ByteView b) noexcept {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

void throw_size_mismatch(std::size_t expected, std::size_t got) {
  throw TimError(Errc::format_error, "expected " + std::to_string(expected) + " bytes, got " +
                                         std::to_string(got));
}

namespace {
constexpr std::array<std::pair<Errc, std::string_view>, 22> kErrcNames{{
    {Errc::usage, "usage"},
    {Errc::format_error, "format_error"},
    {Errc::io_error, "io_error"},
    {Errc::integrity_failure, "integrity_failure"},
    {Errc::seal_violation, "seal_violation"},
    {Errc::unknown_blob, "unknown_blob"},
    {Errc::exclusivity, "exclusivity"},
    {Errc::key_provenance, "key_provenance"},
    {Errc::replay, "replay"},
    {Errc::exhausted_chain, "exhausted_chain"},
    {Errc::boot_refused, "boot_refused"},
    {Errc::schema_violation, "schema_violation"},
    {Errc::attestation_failure, "attestation_failure"},
    {Errc::tunnel_refused, "tunnel_refused"},
    {Errc::certificate_rejected, "certificate_rejected"},
    {Errc::authentication_refused, "authentication_refused"},
    {Errc::not_authenticated, "not_authenticated"},
    {Errc::no_record, "no_record"},
    {Errc::target_rejected, "target_rejected"},
    {Errc::target_unavailable, "target_unavailable"},
    {Errc::credential_access_denied, "credential_access_denied"},
    {Errc::protocol_violation, "protocol_violation"},
}};
}  // namespace

std::string_view errc_name(Errc code) noexcept {
  for (const auto& [c, n] : kErrcNames)
    if (c == code) return n;
  return "unknown";
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
  for (const auto& [c, n] : kErrcNames)
    if (n == name) return c;
  return std::nullopt;
}

}  // namespace tim
