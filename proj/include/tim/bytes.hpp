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

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tim {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

void secure_wipe(void* data, std::size_t size) noexcept;

// Allocator that wipes memory before handing it back.
template <class T>
struct ZeroizingAllocator {
  using value_type = T;

  ZeroizingAllocator() noexcept = default;
  template <class U>
  ZeroizingAllocator(const ZeroizingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return std::allocator<T>{}.allocate(n); }
  void deallocate(T* p, std::size_t n) noexcept {
    secure_wipe(p, n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const ZeroizingAllocator<U>&) const noexcept {
    return true;
  }
};

// Transient plaintext (passwords, private keys, decrypted credentials).
using SecureBytes = std::vector<std::uint8_t, ZeroizingAllocator<std::uint8_t>>;

inline ByteView as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

inline SecureBytes to_secure(ByteView b) { return SecureBytes(b.begin(), b.end()); }

inline Bytes concat(ByteView a, ByteView b) {
  Bytes out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string to_hex(ByteView b);
// Throws TimError(format_error) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

// Constant-time comparison; sizes are not secret.
bool constant_time_equal(ByteView a, ByteView b) noexcept;

// True if `needle` occurs anywhere in `haystack`.
inline bool contains_subsequence(ByteView haystack, ByteView needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

// Fixed-width byte string with a tag type so that a Nonce cannot be passed
// where a Digest is expected.
template <std::size_t N, class Tag>
class FixedBytes {
 public:
  static constexpr std::size_t kSize = N;

  constexpr FixedBytes() noexcept : bytes_{} {}
  explicit FixedBytes(const std::array<std::uint8_t, N>& b) noexcept : bytes_(b) {}

  // Throws TimError(format_error) when b.size() != N.
  static FixedBytes from(ByteView b);
  static FixedBytes from_hex(std::string_view hex) { return from(tim::from_hex(hex)); }

  ByteView view() const noexcept { return {bytes_.data(), bytes_.size()}; }
  const std::array<std::uint8_t, N>& array() const noexcept { return bytes_; }
  Bytes to_vector() const { return Bytes(bytes_.begin(), bytes_.end()); }
  std::string hex() const { return to_hex(view()); }
  bool is_zero() const noexcept {
    return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t v) { return v == 0; });
  }

  std::uint8_t& operator[](std::size_t i) noexcept { return bytes_[i]; }
  std::uint8_t operator[](std::size_t i) const noexcept { return bytes_[i]; }

  friend bool operator==(const FixedBytes&, const FixedBytes&) = default;
  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;

 private:
  std::array<std::uint8_t, N> bytes_;
};

[[noreturn]] void throw_size_mismatch(std::size_t expected, std::size_t got);

template <std::size_t N, class Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from(ByteView b) {
  if (b.size() != N) throw_size_mismatch(N, b.size());
  std::array<std::uint8_t, N> a{};
  std::copy(b.begin(), b.end(), a.begin());
  return FixedBytes(a);
}

struct DigestTag {};
struct NonceTag {};

// 160-bit SHA-1 value; the width of a TPM 1.2 PCR.
using Digest = FixedBytes<20, DigestTag>;
// 160-bit freshness value.
using Nonce = FixedBytes<20, NonceTag>;

}  // namespace tim
