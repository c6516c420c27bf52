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
// Exhaustive check of the register bank on a 4-bit digest: every sequence
// of up to four API calls, over every measurement value, leaves each
// register equal to the fold of its recorded log. No call can place a value
// that the recorded extend chain does not explain.

#include <gtest/gtest.h>

#include <cstdint>
#include <set>

#include "sha1_oracle.hpp"
#include "tim/tpm/pcr_bank.hpp"

namespace tim::tpm {
namespace {

struct Nibble {
  std::uint8_t v = 0;
  friend bool operator==(const Nibble&, const Nibble&) = default;
};

struct NibbleTraits {
  using value_type = Nibble;
  static constexpr std::size_t kCount = 2;
  static Nibble initial() { return {}; }
  // Low four bits of SHA-1(m || old), same operand order as the real bank.
  // Tabulated once; the walk below calls this tens of millions of times.
  static Nibble extend(const Nibble& old, const Nibble& m) {
    static const auto table = [] {
      std::array<std::array<std::uint8_t, 16>, 16> t{};
      for (std::uint8_t o = 0; o < 16; ++o)
        for (std::uint8_t x = 0; x < 16; ++x) {
          const std::uint8_t buf[2] = {x, o};
          t[o][x] = testing::OracleSha1::of(buf, 2)[0] & 0x0f;
        }
      return t;
    }();
    return {table[old.v][m.v]};
  }
  static bool dynamic(std::size_t index) { return index == 1; }
};

using Bank = BasicPcrBank<NibbleTraits>;

// Ops: extend(r, m) for r in {0,1}, m in 0..15; reset(r); power_on;
// restore claiming a value for one register with the current logs.
constexpr int kOps = 2 * 16 + 2 + 1 + 2 * 16;

struct Stats {
  std::uint64_t sequences = 0;
  std::uint64_t refused_restores = 0;
  std::uint64_t accepted_restores = 0;
  std::set<std::uint8_t> reached[2];
};

bool invariant_holds(const Bank& bank) {
  for (std::size_t i = 0; i < 2; ++i)
    if (!(bank.read(i) == Bank::replay(bank.log(i)))) return false;
  return true;
}

void apply(Bank& bank, int op, Stats& stats) {
  if (op < 32) {
    bank.extend(static_cast<std::size_t>(op / 16), "m", Nibble{static_cast<std::uint8_t>(op % 16)});
    return;
  }
  op -= 32;
  if (op < 2) {
    try {
      bank.reset_dynamic(static_cast<std::size_t>(op));
    } catch (const TimError&) {
      if (op != 0) ADD_FAILURE() << "dynamic register refused a reset";
    }
    return;
  }
  op -= 2;
  if (op == 0) {
    bank.power_on();
    return;
  }
  op -= 1;
  const std::size_t reg = static_cast<std::size_t>(op / 16);
  std::array<Nibble, 2> claimed{bank.read(0), bank.read(1)};
  claimed[reg] = Nibble{static_cast<std::uint8_t>(op % 16)};
  std::array<std::vector<Bank::LogEntry>, 2> logs{bank.log(0), bank.log(1)};
  try {
    bank.restore(claimed, logs);
    ++stats.accepted_restores;
    if (!(claimed[reg] == Bank::replay(logs[reg]))) ADD_FAILURE() << "restore accepted a forged value";
  } catch (const TimError& e) {
    ++stats.refused_restores;
    if (e.code() != Errc::format_error) ADD_FAILURE() << "unexpected error " << e.what();
  }
}

void explore(const Bank& bank, int depth, Stats& stats) {
  if (depth == 0) {
    ++stats.sequences;
    return;
  }
  for (int op = 0; op < kOps; ++op) {
    Bank next = bank;
    apply(next, op, stats);
    if (!invariant_holds(next)) {
      ADD_FAILURE() << "register diverged from its log after op " << op;
      return;
    }
    for (std::size_t i = 0; i < 2; ++i) stats.reached[i].insert(next.read(i).v);
    explore(next, depth - 1, stats);
  }
}

TEST(PcrModelCheck, EveryReachableValueIsExplainedByItsLog) {
  Stats stats;
  explore(Bank{}, 4, stats);
  EXPECT_EQ(stats.sequences, static_cast<std::uint64_t>(kOps) * kOps * kOps * kOps);
  // Restores that claim anything but the replayed value are refused.
  EXPECT_GT(stats.refused_restores, 0u);
  EXPECT_GT(stats.accepted_restores, 0u);
}

TEST(PcrModelCheck, UnreachableTargetsStayUnreachable) {
  // Values reachable in one step from the initial state are exactly the
  // single-extend images of 0; a restore cannot add others.
  std::set<std::uint8_t> one_step;
  for (std::uint8_t m = 0; m < 16; ++m) one_step.insert(NibbleTraits::extend({}, {m}).v);
  for (int op = 0; op < kOps; ++op) {
    Bank bank;
    Stats stats;
    apply(bank, op, stats);
    for (std::size_t i = 0; i < 2; ++i) {
      const std::uint8_t v = bank.read(i).v;
      EXPECT_TRUE(v == 0 || one_step.count(v)) << "op " << op << " reached " << int(v);
    }
  }
}

}  // namespace
}  // namespace tim::tpm
