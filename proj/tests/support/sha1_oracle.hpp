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

// Test-only SHA-1 written from the FIPS 180-4 description. It shares no code
// with the library hash, so agreement between the two is evidence for both.

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tim::testing {

class OracleSha1 {
 public:
  using Digest = std::array<std::uint8_t, 20>;

  static Digest of(const std::uint8_t* data, std::size_t size) {
    std::vector<std::uint8_t> m(data, data + size);
    const std::uint64_t bit_len = static_cast<std::uint64_t>(size) * 8;
    m.push_back(0x80);
    while (m.size() % 64 != 56) m.push_back(0);
    for (int i = 7; i >= 0; --i) m.push_back(static_cast<std::uint8_t>(bit_len >> (8 * i)));

    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    for (std::size_t block = 0; block < m.size(); block += 64) {
      std::uint32_t w[80];
      for (int t = 0; t < 16; ++t) {
        w[t] = static_cast<std::uint32_t>(m[block + 4 * t]) << 24 | static_cast<std::uint32_t>(m[block + 4 * t + 1]) << 16 |
               static_cast<std::uint32_t>(m[block + 4 * t + 2]) << 8 | m[block + 4 * t + 3];
      }
      for (int t = 16; t < 80; ++t) w[t] = rotl(w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16], 1);
      std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
      for (int t = 0; t < 80; ++t) {
        std::uint32_t f, k;
        if (t < 20) {
          f = (b & c) | (~b & d);
          k = 0x5A827999u;
        } else if (t < 40) {
          f = b ^ c ^ d;
          k = 0x6ED9EBA1u;
        } else if (t < 60) {
          f = (b & c) | (b & d) | (c & d);
          k = 0x8F1BBCDCu;
        } else {
          f = b ^ c ^ d;
          k = 0xCA62C1D6u;
        }
        std::uint32_t tmp = rotl(a, 5) + f + e + k + w[t];
        e = d;
        d = c;
        c = rotl(b, 30);
        b = a;
        a = tmp;
      }
      h[0] += a;
      h[1] += b;
      h[2] += c;
      h[3] += d;
      h[4] += e;
    }
    Digest out{};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j) out[4 * i + j] = static_cast<std::uint8_t>(h[i] >> (24 - 8 * j));
    return out;
  }

  template <class Range>
  static Digest of(const Range& r) {
    return of(reinterpret_cast<const std::uint8_t*>(r.data()), r.size());
  }

  static Digest of(std::string_view s) { return of(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()); }

  // extend(old, m) = SHA1(m || old)
  static Digest extend(const Digest& old, const Digest& m) {
    std::vector<std::uint8_t> buf(m.begin(), m.end());
    buf.insert(buf.end(), old.begin(), old.end());
    return of(buf);
  }

 private:
  static std::uint32_t rotl(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }
};

}  // namespace tim::testing
