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

// Helpers shared by the test binaries.

#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "sha1_oracle.hpp"
#include "tim/bytes.hpp"
#include "tim/error.hpp"

namespace tim::testing {

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tim-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Digest to_digest(const OracleSha1::Digest& d) { return Digest::from(ByteView(d.data(), d.size())); }
inline OracleSha1::Digest from_digest(const Digest& d) { return d.array(); }

// Runs `fn` and returns the TimError it throws; fails the test otherwise.
template <class Fn>
TimError capture_error(Fn&& fn) {
  try {
    fn();
  } catch (const TimError& e) {
    return e;
  }
  throw std::runtime_error("expected a TimError");
}

}  // namespace tim::testing

#define EXPECT_TIM_ERROR(stmt, errc)                                                   \
  do {                                                                                 \
    try {                                                                              \
      stmt;                                                                            \
      ADD_FAILURE() << "no error from " #stmt;                                         \
    } catch (const ::tim::TimError& tim_error_) {                                      \
      EXPECT_EQ(::tim::errc_name(tim_error_.code()), ::tim::errc_name(errc)) << tim_error_.what(); \
    }                                                                                  \
  } while (0)
