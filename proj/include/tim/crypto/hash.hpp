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

#include <initializer_list>
#include <string_view>

#include "tim/bytes.hpp"

namespace tim::crypto {

// SHA-1, matching the TPM 1.2 PCR width. SHA-1 is not collision resistant;
// every caller goes through this header so the function can be swapped.
Digest hash(ByteView data);
inline Digest hash(std::string_view data) { return hash(as_bytes(data)); }

// hash(a || b || ...) without materialising the concatenation.
Digest hash_concat(std::initializer_list<ByteView> parts);

}  // namespace tim::crypto
