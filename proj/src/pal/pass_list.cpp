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
#include "tim/pal/pass_list.hpp"

#include <algorithm>

#include "tim/codec.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/error.hpp"

namespace tim::pal {
namespace {

constexpr std::string_view kMagic = "PLST";
constexpr std::uint8_t kVersion = 1;

}  // namespace

Digest master_hash(const Salt& salt, std::string_view master_password) {
  return crypto::hash_concat({salt.view(), as_bytes(master_password)});
}

const PassEntry* PassList::find(std::string_view user_id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), user_id,
                             [](const PassEntry& e, std::string_view id) { return e.user_id < id; });
  return it != entries_.end() && it->user_id == user_id ? &*it : nullptr;
}

PassEntry* PassList::find(std::string_view user_id) {
  return const_cast<PassEntry*>(std::as_const(*this).find(user_id));
}

void PassList::upsert(PassEntry entry) {
  if (PassEntry* existing = find(entry.user_id)) {
    *existing = std::move(entry);
    return;
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), entry.user_id,
                             [](const PassEntry& e, const std::string& id) { return e.user_id < id; });
  entries_.insert(it, std::move(entry));
}

SecureBytes PassList::encode() const {
  Writer w;
  w.raw(as_bytes(kMagic)).u8(kVersion).u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    w.str(e.user_id).fixed(e.salt).fixed(e.master_hash).fixed(e.otp.head).u32(e.otp.remaining);
    w.str(e.otp_params.to_line());
  }
  Bytes plain = std::move(w).bytes();
  SecureBytes out(plain.begin(), plain.end());
  secure_wipe(plain.data(), plain.size());
  return out;
}

PassList PassList::decode(ByteView in) {
  Reader r(in);
  if (to_string(r.raw(kMagic.size())) != kMagic) throw TimError(Errc::format_error, "not a pass list");
  if (r.u8() != kVersion) throw TimError(Errc::format_error, "unsupported pass list version");
  std::uint32_t n = r.u32();
  PassList list;
  for (std::uint32_t i = 0; i < n; ++i) {
    PassEntry e;
    e.user_id = r.str();
    e.salt = r.fixed<Salt>();
    e.master_hash = r.fixed<Digest>();
    e.otp.head = r.fixed<Digest>();
    e.otp.remaining = r.u32();
    e.otp_params = otp::OtpParams::parse(r.str());
    if (!list.entries_.empty() && !(list.entries_.back().user_id < e.user_id))
      throw TimError(Errc::format_error, "pass list entries out of order");
    list.entries_.push_back(std::move(e));
  }
  r.expect_done("pass list");
  return list;
}

}  // namespace tim::pal
