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

#include "tim/codec.hpp"

#include <limits>

#include "tim/error.hpp"

namespace tim {

Writer& Writer::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

Writer& Writer::u16(std::uint16_t v) {
  out_.push_back(static_cast<std::uint8_t>(v >> 8));
  out_.push_back(static_cast<std::uint8_t>(v));
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::raw(ByteView b) {
  out_.insert(out_.end(), b.begin(), b.end());
  return *this;
}

Writer& Writer::blob(ByteView b) {
  if (b.size() > std::numeric_limits<std::uint32_t>::max())
    throw TimError(Errc::format_error, "blob too large");
  u32(static_cast<std::uint32_t>(b.size()));
  return raw(b);
}

Writer& Writer::str(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max())
    throw TimError(Errc::format_error, "string too long");
  u16(static_cast<std::uint16_t>(s.size()));
  return raw(as_bytes(s));
}

ByteView Reader::raw(std::size_t n) {
  if (n > remaining()) throw TimError(Errc::format_error, "truncated input");
  ByteView out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t Reader::u8() { return raw(1)[0]; }

std::uint16_t Reader::u16() {
  ByteView b = raw(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t Reader::u32() {
  ByteView b = raw(4);
  std::uint32_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t Reader::u64() {
  ByteView b = raw(8);
  std::uint64_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

ByteView Reader::blob() { return raw(u32()); }

std::string Reader::str() { return to_string(raw(u16())); }

void Reader::expect_done(std::string_view what) const {
  if (!done())
    throw TimError(Errc::format_error, std::string(what) + ": trailing bytes after record");
}

Fields& Fields::set(std::string name, ByteView value) {
  fields_.insert_or_assign(std::move(name), Bytes(value.begin(), value.end()));
  return *this;
}

Fields& Fields::set(std::string name, std::string_view value) {
  return set(std::move(name), as_bytes(value));
}

bool Fields::has(std::string_view name) const { return fields_.find(name) != fields_.end(); }

const Bytes& Fields::get(std::string_view name) const {
  auto it = fields_.find(name);
  if (it == fields_.end())
    throw TimError(Errc::schema_violation, "missing field '" + std::string(name) + "'");
  return it->second;
}

std::string Fields::get_string(std::string_view name) const { return to_string(get(name)); }

std::optional<Bytes> Fields::find(std::string_view name) const {
  auto it = fields_.find(name);
  if (it == fields_.end()) return std::nullopt;
  return it->second;
}

namespace {
template <class Out>
void encode_into(const std::map<std::string, Bytes, std::less<>>& fields, Out& out) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& [name, value] : fields) w.str(name).blob(value);
  Bytes b = std::move(w).bytes();
  out.assign(b.begin(), b.end());
  secure_wipe(b.data(), b.size());
}
}  // namespace

Bytes Fields::encode() const {
  Bytes out;
  encode_into(fields_, out);
  return out;
}

SecureBytes Fields::encode_secure() const {
  SecureBytes out;
  encode_into(fields_, out);
  return out;
}

Fields Fields::decode(ByteView in) {
  Reader r(in);
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw TimError(Errc::format_error, "field count exceeds input");
  Fields out;
  std::string previous;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    if (i > 0 && name <= previous)
      throw TimError(Errc::format_error, "fields not in canonical order");
    ByteView value = r.blob();
    out.fields_.emplace(name, Bytes(value.begin(), value.end()));
    previous = std::move(name);
  }
  r.expect_done("fields");
  return out;
}

void Fields::clear() noexcept {
  for (auto& [name, value] : fields_) secure_wipe(value.data(), value.size());
  fields_.clear();
}

}  // namespace tim
