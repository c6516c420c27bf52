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

// S/Key-style hash-chain one-time passwords.
//
// With x0 = H(secret_phrase || seed), password i (1-based) is H^(N-i)(x0).
// The verifier starts from head = H^N(x0) and accepts p iff H(p) == head,
// after which p becomes the new head.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tim/bytes.hpp"

namespace tim::otp {

inline constexpr std::string_view kAlgorithmTag = "otp/v1";
inline constexpr std::uint32_t kDefaultCount = 100;
inline constexpr std::uint32_t kMaxCount = 100000;

struct OtpParams {
  std::string seed;
  std::uint32_t count = kDefaultCount;
  std::string algorithm_tag{kAlgorithmTag};

  // Throws TimError(format_error) unless count is in [1, kMaxCount], the seed
  // is non-empty printable ASCII without ';' or '=', and the tag is known.
  void validate() const;

  // "otp/v1;seed=<s>;n=<N>"
  std::string to_line() const;
  static OtpParams parse(std::string_view line);

  friend bool operator==(const OtpParams&, const OtpParams&) = default;
};

struct OtpChain {
  Digest head;
  std::uint32_t remaining = 0;

  friend bool operator==(const OtpChain&, const OtpChain&) = default;
};

std::vector<Digest> derive_chain(std::string_view secret_phrase, const OtpParams& params);

// The verifier state matching derive_chain: head = H^N(x0), remaining = N.
OtpChain initial_chain(std::string_view secret_phrase, const OtpParams& params);

struct Verification {
  bool accepted = false;
  OtpChain chain;
};

// Throws TimError(exhausted_chain) when chain.remaining == 0.
Verification verify_and_advance(const OtpChain& chain, const Digest& candidate);

// Passwords travel as 40-char lowercase hex.
std::string format_password(const Digest& password);
// Throws TimError(format_error) for anything but 40 lowercase hex chars.
Digest parse_password(std::string_view text);

}  // namespace tim::otp
