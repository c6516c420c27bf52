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

// Release images of the three measured modules. An image is the release
// descriptor (name, version, digest of the module's sources at build time),
// so any source change to a module changes its measurement.

#pragma once

#include <string_view>

#include "tim/bytes.hpp"

namespace tim::pal {

enum class Module { pal, flicker, proxy };

std::string_view module_name(Module m) noexcept;
Bytes release_image(Module m);
std::string_view release_version() noexcept;

}  // namespace tim::pal
