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
#include <cstddef>
#include <string>
#include <vector>

#include "tim/error.hpp"

namespace tim::tpm {

// Platform configuration registers, generic over the digest so the same code
// can be model-checked with a tiny digest in tests.
//
// Traits must provide:
//   using value_type;
//   static constexpr std::size_t kCount;
//   static value_type initial();
//   static value_type extend(const value_type& old, const value_type& m);
//   static bool dynamic(std::size_t index);   // may be reset by late launch
//
// Invariant: for every register i, read(i) equals the fold of extend over
// log(i) starting from initial(). No member assigns a register directly.
template <class Traits>
class BasicPcrBank {
 public:
  using value_type = typename Traits::value_type;
  static constexpr std::size_t kCount = Traits::kCount;

  struct LogEntry {
    std::string label;
    value_type measurement;
    friend bool operator==(const LogEntry&, const LogEntry&) = default;
  };

  BasicPcrBank() { power_on(); }

  const value_type& read(std::size_t index) const {
    check(index);
    return registers_[index];
  }

  const std::vector<LogEntry>& log(std::size_t index) const {
    check(index);
    return logs_[index];
  }

  value_type extend(std::size_t index, std::string label, const value_type& measurement) {
    check(index);
    registers_[index] = Traits::extend(registers_[index], measurement);
    logs_[index].push_back({std::move(label), measurement});
    return registers_[index];
  }

  // Late-launch reset: back to initial() with an empty log. Only dynamic
  // registers may be reset.
  void reset_dynamic(std::size_t index) {
    check(index);
    if (!Traits::dynamic(index))
      throw TimError(Errc::usage, "register " + std::to_string(index) + " is not resettable");
    registers_[index] = Traits::initial();
    logs_[index].clear();
  }

  void power_on() {
    registers_.fill(Traits::initial());
    for (auto& l : logs_) l.clear();
  }

  static value_type replay(const std::vector<LogEntry>& entries) {
    value_type v = Traits::initial();
    for (const auto& e : entries) v = Traits::extend(v, e.measurement);
    return v;
  }

  // Rebuilds the bank from recorded logs. Claimed register values must equal
  // the replay of their logs, so a restore can only reach states an extend
  // sequence could have produced.
  void restore(const std::array<value_type, kCount>& claimed,
               const std::array<std::vector<LogEntry>, kCount>& logs) {
    for (std::size_t i = 0; i < kCount; ++i) {
      if (!(replay(logs[i]) == claimed[i]))
        throw TimError(Errc::format_error,
                       "register " + std::to_string(i) + " does not match its measurement log");
    }
    registers_ = claimed;
    logs_ = logs;
  }

 private:
  static void check(std::size_t index) {
    if (index >= kCount)
      throw TimError(Errc::usage, "PCR index " + std::to_string(index) + " out of range");
  }

  std::array<value_type, kCount> registers_;
  std::array<std::vector<LogEntry>, kCount> logs_;
};

}  // namespace tim::tpm
