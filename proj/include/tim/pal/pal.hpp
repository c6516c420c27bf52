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

// PAL entry point. Four phases:
//   1. extend PCR18 with hash(Flicker image) then hash(proxy image),
//      unconditionally, so PCR18 = H(H(PM) || H(H(Flicker) || H(H(PAL) || 0)));
//   2. decode and schema-check the input envelope;
//   3. run the one block named by the option;
//   4. encode the output envelope.
// Any failure after phase 1 produces an error envelope and nothing else.

#pragma once

#include <filesystem>

#include "tim/bytes.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::pal {

// The live Flicker and proxy module images, as loaded at the time of the call.
struct LiveModules {
  ByteView flicker;
  ByteView proxy;
};

// Requires an open late-launch session.
Bytes run_pal(tpm::TpmEmulator& tpm, const LiveModules& modules, ByteView input);

// Same, reading and writing the Flicker envelope files.
void run_pal_files(tpm::TpmEmulator& tpm, const LiveModules& modules,
                   const std::filesystem::path& input, const std::filesystem::path& output);

}  // namespace tim::pal
