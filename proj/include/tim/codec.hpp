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

// Big-endian, length-prefixed binary encoding used by every persisted file and
// every wire message. Byte layouts are documented in docs/formats.md.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "tim/bytes.hpp"

namespace tim {

class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u16(std::uint16_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& raw(ByteView b);
  // u32 length followed by the bytes.
  Writer& blob(ByteView b);
  // u16 length followed by UTF-8 bytes.
  Writer& str(std::string_view s);
  template <std::size_t N, class Tag>
  Writer& fixed(const FixedBytes<N, Tag>& v) {
    return raw(v.view());
  }

  const Bytes& bytes() const& noexcept { return out_; }
  Bytes bytes() && noexcept { return std::move(out_); }

 private:
  Bytes out_;
};

// Every read throws TimError(format_error) on truncation.
class Reader {
 public:
  explicit Reader(ByteView in) noexcept : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView raw(std::size_t n);
  ByteView blob();
  std::string str();
  template <class Fixed>
  Fixed fixed() {
    return Fixed::from(raw(Fixed::kSize));
  }

  bool done() const noexcept { return pos_ == in_.size(); }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  // Throws unless the whole input was consumed.
  void expect_done(std::string_view what) const;

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

// A name-sorted record of named byte fields. The canonical encoding is
//   u32 count, then per field (ascending by name):
//   u16 name_len, name, u32 value_len, value
// Decoding rejects unsorted or duplicate names and trailing bytes, so each
// Fields value has exactly one encoding.
class Fields {
 public:
  Fields() = default;

  Fields& set(std::string name, ByteView value);
  Fields& set(std::string name, std::string_view value);
  Fields& set(std::string name, const Bytes& value) { return set(std::move(name), ByteView(value)); }
  template <std::size_t N, class Tag>
  Fields& set(std::string name, const FixedBytes<N, Tag>& value) {
    return set(std::move(name), value.view());
  }

  bool has(std::string_view name) const;
  // Throws TimError(schema_violation) if absent.
  const Bytes& get(std::string_view name) const;
  std::string get_string(std::string_view name) const;
  template <class Fixed>
  Fixed get_fixed(std::string_view name) const {
    return Fixed::from(get(name));
  }
  std::optional<Bytes> find(std::string_view name) const;

  std::size_t size() const noexcept { return fields_.size(); }
  bool empty() const noexcept { return fields_.empty(); }
  auto begin() const noexcept { return fields_.begin(); }
  auto end() const noexcept { return fields_.end(); }

  Bytes encode() const;
  SecureBytes encode_secure() const;
  static Fields decode(ByteView in);

  // Wipes every value.
  void clear() noexcept;

  friend bool operator==(const Fields&, const Fields&) = default;

 private:
  std::map<std::string, Bytes, std::less<>> fields_;
};

}  // namespace tim
