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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tim/bytes.hpp"
#include "tim/otp/otp.hpp"

namespace tim::pal {

struct SaltTag {};
using Salt = FixedBytes<20, SaltTag>;

struct PassEntry {
  std::string user_id;
  Salt salt;
  Digest master_hash;  // hash(salt || master_password)
  otp::OtpChain otp;
  otp::OtpParams otp_params;

  friend bool operator==(const PassEntry&, const PassEntry&) = default;
};

Digest master_hash(const Salt& salt, std::string_view master_password);

// Proxy authentication passwords. Lives in plaintext only inside a PAL
// session; outside it is always a sealed blob.
//
// Encoding: "PLST" | u8 version (1) | u32 count | per entry (sorted by
// user_id): str user_id, 20 salt, 20 master_hash, 20 otp head,
// u32 otp remaining, str otp params line.
class PassList {
 public:
  const PassEntry* find(std::string_view user_id) const;
  PassEntry* find(std::string_view user_id);
  // Inserts or replaces the entry for entry.user_id.
  void upsert(PassEntry entry);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<PassEntry>& entries() const noexcept { return entries_; }

  SecureBytes encode() const;
  static PassList decode(ByteView in);

  friend bool operator==(const PassList&, const PassList&) = default;

 private:
  std::vector<PassEntry> entries_;
};

}  // namespace tim::pal
