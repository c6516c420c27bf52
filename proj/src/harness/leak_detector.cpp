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
#include "tim/harness/leak_detector.hpp"

#include "tim/file_io.hpp"

namespace tim::harness {

void LeakDetector::add_secret(std::string label, std::string_view value) {
  if (value.empty()) return;
  std::lock_guard lock(mu_);
  for (const auto& [l, v] : secrets_)
    if (ByteView(v).size() == value.size() && to_string(v) == value) return;
  secrets_.emplace_back(std::move(label), to_secure(as_bytes(value)));
}

std::size_t LeakDetector::secret_count() const {
  std::lock_guard lock(mu_);
  return secrets_.size();
}

void LeakDetector::scan(const std::string& location, ByteView data) {
  std::lock_guard lock(mu_);
  ++scanned_;
  for (const auto& [label, value] : secrets_)
    if (contains_subsequence(data, value)) findings_.push_back({label, location});
}

void LeakDetector::scan_transcript(const std::vector<TranscriptEntry>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i)
    scan("frame " + std::to_string(i) + " (" + entries[i].frame.kind + ")", entries[i].frame.encode());
}

void LeakDetector::scan_directory(const std::filesystem::path& root) {
  std::error_code ec;
  for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
       !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file()) scan("file " + it->path().filename().string(), read_file(it->path()));
  }
}

std::vector<LeakFinding> LeakDetector::findings() const {
  std::lock_guard lock(mu_);
  return findings_;
}

std::size_t LeakDetector::scanned_items() const {
  std::lock_guard lock(mu_);
  return scanned_;
}

}  // namespace tim::harness
