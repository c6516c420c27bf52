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

#include <array>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>

#include "tim/bytes.hpp"

namespace tim::crypto {

// Seedable deterministic random generator: the ChaCha20 keystream under
// key = SHA-256("tim-rng/v1" || seed || stream label). Two generators built
// from the same (seed, label) produce identical output, which is what lets a
// harness run replay bit-exactly. Thread-safe.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);
  // Seed drawn from the operating system entropy source.
  static Rng from_entropy(std::string_view stream);

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  SecureBytes secure_bytes(std::size_t n);
  Nonce nonce();
  std::uint64_t next_u64();
  // Uniform in [0, bound); bound must be non-zero.
  std::uint64_t uniform(std::uint64_t bound);

 private:
  void refill();

  std::mutex mu_;
  std::array<std::uint8_t, 32> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 64> buffer_{};
  std::size_t buffered_ = 0;
};

}  // namespace tim::crypto
