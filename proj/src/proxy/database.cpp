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
#include "tim/proxy/database.hpp"

#include <fstream>
#include <mutex>

#include "tim/codec.hpp"
#include "tim/error.hpp"
#include "tim/file_io.hpp"

namespace tim::proxy {
namespace {

constexpr std::string_view kMagic = "TIMD";
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kPassList = 1;
constexpr std::uint8_t kPmPub = 2;
constexpr std::uint8_t kRecord = 3;

Bytes header() {
  Writer w;
  w.raw(as_bytes(kMagic)).u16(kVersion);
  return std::move(w).bytes();
}

}  // namespace

Bytes CredentialRecord::encode() const {
  Writer w;
  w.str(user_id).str(site_id).blob(enc_cred_with_pal).blob(sealed_pal_priv.encode()).fixed(nonce);
  w.blob(form_schema.encode());
  return std::move(w).bytes();
}

CredentialRecord CredentialRecord::decode(ByteView in) {
  Reader r(in);
  CredentialRecord rec;
  rec.user_id = r.str();
  rec.site_id = r.str();
  ByteView enc = r.blob();
  rec.enc_cred_with_pal.assign(enc.begin(), enc.end());
  rec.sealed_pal_priv = tpm::SealedBlob::decode(r.blob());
  rec.nonce = r.fixed<Nonce>();
  rec.form_schema = FormSchema::decode(r.blob());
  r.expect_done("credential record");
  return rec;
}

CredentialDb::CredentialDb(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    load();
  } else {
    write_file_atomic(path_, header());
  }
}

void CredentialDb::load() {
  Bytes data = read_file(path_);
  Reader r(data);
  if (to_string(r.raw(kMagic.size())) != kMagic) throw TimError(Errc::format_error, "not a credential database");
  if (r.u16() != kVersion) throw TimError(Errc::format_error, "unsupported database version");
  while (!r.done()) {
    std::uint8_t type = r.u8();
    ByteView body = r.blob();
    switch (type) {
      case kPassList: pass_list_ = tpm::SealedBlob::decode(body); break;
      case kPmPub: sealed_pm_pub_ = tpm::SealedBlob::decode(body); break;
      case kRecord: {
        CredentialRecord rec = CredentialRecord::decode(body);
        Key key{rec.user_id, rec.site_id};
        records_[key] = std::move(rec);
        break;
      }
      default: throw TimError(Errc::format_error, "unknown database record type");
    }
  }
}

void CredentialDb::append(std::uint8_t type, ByteView body) {
  Writer w;
  w.u8(type).blob(body);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  const Bytes& b = w.bytes();
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  out.flush();
  if (!out) throw TimError(Errc::io_error, "cannot append to " + path_.string());
  out.close();
  persisted();
}

void CredentialDb::rewrite() {
  Writer w;
  w.raw(header());
  if (pass_list_) w.u8(kPassList).blob(pass_list_->encode());
  if (sealed_pm_pub_) w.u8(kPmPub).blob(sealed_pm_pub_->encode());
  for (const auto& [key, rec] : records_) w.u8(kRecord).blob(rec.encode());
  write_file_atomic(path_, w.bytes());
  persisted();
}

void CredentialDb::persisted() {
  if (observer_) observer_(read_file(path_));
}

void CredentialDb::set_persist_observer(std::function<void(ByteView)> observer) {
  std::unique_lock lock(mu_);
  observer_ = std::move(observer);
}

std::optional<tpm::SealedBlob> CredentialDb::pass_list() const {
  std::shared_lock lock(mu_);
  return pass_list_;
}

void CredentialDb::set_pass_list(const tpm::SealedBlob& blob) {
  std::unique_lock lock(mu_);
  pass_list_ = blob;
  rewrite();
}

std::optional<tpm::SealedBlob> CredentialDb::sealed_pm_pub() const {
  std::shared_lock lock(mu_);
  return sealed_pm_pub_;
}

void CredentialDb::set_sealed_pm_pub(const tpm::SealedBlob& blob) {
  std::unique_lock lock(mu_);
  sealed_pm_pub_ = blob;
  rewrite();
}

std::optional<CredentialRecord> CredentialDb::find(std::string_view user_id, std::string_view site_id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(Key{std::string(user_id), std::string(site_id)});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void CredentialDb::insert(const CredentialRecord& record) {
  std::unique_lock lock(mu_);
  Key key{record.user_id, record.site_id};
  if (records_.count(key)) throw TimError(Errc::usage, "record already exists for " + record.user_id + "@" + record.site_id);
  append(kRecord, record.encode());
  records_[key] = record;
}

void CredentialDb::replace(const CredentialRecord& record) {
  std::unique_lock lock(mu_);
  Key key{record.user_id, record.site_id};
  auto it = records_.find(key);
  if (it == records_.end()) throw TimError(Errc::no_record, "no record for " + record.user_id + "@" + record.site_id);
  CredentialRecord old = it->second;
  it->second = record;
  try {
    rewrite();
  } catch (...) {
    it->second = std::move(old);
    throw;
  }
}

std::vector<CredentialRecord> CredentialDb::records() const {
  std::shared_lock lock(mu_);
  std::vector<CredentialRecord> out;
  for (const auto& [key, rec] : records_) out.push_back(rec);
  return out;
}

}  // namespace tim::proxy
