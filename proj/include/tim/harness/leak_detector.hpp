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

// Substring search for registered secrets in everything an attacker could
// read: frames, database snapshots and PAL envelope files.

#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "tim/bytes.hpp"
#include "tim/harness/sim_network.hpp"

namespace tim::harness {

struct LeakFinding {
  std::string secret;  // the label, never the value
  std::string location;

  friend bool operator==(const LeakFinding&, const LeakFinding&) = default;
};

class LeakDetector {
 public:
  void add_secret(std::string label, std::string_view value);
  std::size_t secret_count() const;

  void scan(const std::string& location, ByteView data);
  void scan_transcript(const std::vector<TranscriptEntry>& entries);
  // Every regular file below `root`.
  void scan_directory(const std::filesystem::path& root);

  std::vector<LeakFinding> findings() const;
  std::size_t scanned_items() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, SecureBytes>> secrets_;
  std::vector<LeakFinding> findings_;
  std::size_t scanned_ = 0;
};

}  // namespace tim::harness
