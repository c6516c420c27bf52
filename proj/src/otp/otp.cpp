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

#include "tim/otp/otp.hpp"

#include <charconv>

#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"

namespace tim::otp {
namespace {

[[noreturn]] void bad(const std::string& what) { throw TimError(Errc::format_error, what); }

Digest start(std::string_view secret_phrase, const OtpParams& params) {
  return crypto::hash_concat({as_bytes(secret_phrase), as_bytes(params.seed)});
}

}  // namespace

void OtpParams::validate() const {
  if (algorithm_tag != kAlgorithmTag) bad("unknown OTP algorithm '" + algorithm_tag + "'");
  if (count < 1 || count > kMaxCount) bad("OTP chain length out of range");
  if (seed.empty()) bad("OTP seed is empty");
  for (char c : seed) {
    if (c < 0x21 || c > 0x7e || c == ';' || c == '=') bad("OTP seed has a forbidden character");
  }
}

std::string OtpParams::to_line() const {
  validate();
  return algorithm_tag + ";seed=" + seed + ";n=" + std::to_string(count);
}

OtpParams OtpParams::parse(std::string_view line) {
  if (line.ends_with(';')) bad("malformed OTP parameter line");
  auto next = [&line]() {
    std::size_t p = line.find(';');
    std::string_view part = line.substr(0, p);
    line = p == std::string_view::npos ? std::string_view{} : line.substr(p + 1);
    return part;
  };
  OtpParams params;
  params.algorithm_tag = std::string(next());
  std::string_view seed = next();
  std::string_view n = next();
  if (!line.empty() || !seed.starts_with("seed=") || !n.starts_with("n="))
    bad("malformed OTP parameter line");
  params.seed = std::string(seed.substr(5));
  n.remove_prefix(2);
  auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), params.count);
  if (ec != std::errc{} || ptr != n.data() + n.size() || n.empty() || n[0] == '0')
    bad("malformed OTP count");
  params.validate();
  return params;
}

std::vector<Digest> derive_chain(std::string_view secret_phrase, const OtpParams& params) {
  params.validate();
  std::vector<Digest> chain(params.count);
  Digest v = start(secret_phrase, params);
  // Fill from the end: element N is x0, each earlier element hashes the next.
  for (std::size_t i = params.count; i-- > 0;) {
    chain[i] = v;
    v = crypto::hash(v.view());
  }
  return chain;
}

OtpChain initial_chain(std::string_view secret_phrase, const OtpParams& params) {
  params.validate();
  Digest v = start(secret_phrase, params);
  for (std::uint32_t i = 0; i < params.count; ++i) v = crypto::hash(v.view());
  return {v, params.count};
}

Verification verify_and_advance(const OtpChain& chain, const Digest& candidate) {
  if (chain.remaining == 0) throw TimError(Errc::exhausted_chain, "OTP chain exhausted");
  if (crypto::hash(candidate.view()) == chain.head)
    return {true, {candidate, chain.remaining - 1}};
  return {false, chain};
}

std::string format_password(const Digest& password) { return password.hex(); }

Digest parse_password(std::string_view text) {
  if (text.size() != 2 * Digest::kSize) bad("OTP password must be 40 hex characters");
  for (char c : text) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) bad("OTP password must be lowercase hex");
  }
  return Digest::from_hex(text);
}

}  // namespace tim::otp
