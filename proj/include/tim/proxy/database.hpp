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

// Proxy credential database: one file holding the sealed pass list, the
// sealed proxy-module public key and one record per (user, site).
//
// File: "TIMD" | u16 version (1) | records until EOF, each
//   u8 type | u32 len | body
// type 1: sealed pass list (SealedBlob encoding); the last one wins
// type 2: sealed PM public key (SealedBlob encoding); the last one wins
// type 3: credential record (CredentialRecord::encode)
// Inserts append; updates rewrite the whole file and rename it into place.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "tim/bytes.hpp"
#include "tim/proxy/forms.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::proxy {

struct CredentialRecord {
  std::string user_id;
  std::string site_id;
  Bytes enc_cred_with_pal;
  tpm::SealedBlob sealed_pal_priv;
  Nonce nonce;
  FormSchema form_schema;

  // str user | str site | blob enc_cred | blob sealed_pal_priv | 20 nonce |
  // blob form schema
  Bytes encode() const;
  static CredentialRecord decode(ByteView in);

  friend bool operator==(const CredentialRecord&, const CredentialRecord&) = default;
};

class CredentialDb {
 public:
  // Loads the file if it exists, otherwise creates an empty one.
  explicit CredentialDb(std::filesystem::path path);

  std::optional<tpm::SealedBlob> pass_list() const;
  void set_pass_list(const tpm::SealedBlob& blob);

  std::optional<tpm::SealedBlob> sealed_pm_pub() const;
  void set_sealed_pm_pub(const tpm::SealedBlob& blob);

  std::optional<CredentialRecord> find(std::string_view user_id, std::string_view site_id) const;
  // Throws TimError(usage) if the (user, site) pair already has a record.
  void insert(const CredentialRecord& record);
  // Throws TimError(no_record) if there is nothing to replace.
  void replace(const CredentialRecord& record);

  std::vector<CredentialRecord> records() const;
  const std::filesystem::path& path() const noexcept { return path_; }

  // Called with the file contents after every write.
  void set_persist_observer(std::function<void(ByteView)> observer);

 private:
  using Key = std::pair<std::string, std::string>;

  void load();
  void append(std::uint8_t type, ByteView body);
  void rewrite();
  void persisted();

  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::optional<tpm::SealedBlob> pass_list_;
  std::optional<tpm::SealedBlob> sealed_pm_pub_;
  std::map<Key, CredentialRecord> records_;
  std::function<void(ByteView)> observer_;
};

}  // namespace tim::proxy
