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

// Flicker-style PAL invocation: write the input envelope file, late-launch
// the PAL, let it run, close the session, read the output envelope file.
// Invocations are serialized; the whole sequence is one exclusive section.

#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>

#include "tim/pal/envelope.hpp"
#include "tim/proxy/artifacts.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::proxy {

struct Attestation {
  tpm::Quote quote;
  tpm::MeasurementLog sml;
};

struct FlickerResult {
  pal::PalEnvelope output;
  // Quote over PCR18 taken before the session closed, when requested.
  std::optional<Attestation> attestation;
};

class Flicker {
 public:
  using FileHook = std::function<void(const std::filesystem::path&)>;
  using EnvelopeObserver = std::function<void(ByteView input, ByteView output)>;

  Flicker(tpm::TpmEmulator& tpm, const ArtifactStore& artifacts, std::filesystem::path workdir);

  // Throws TimError(exclusivity) if the TPM already has an open session, and
  // TimError(protocol_violation) if the output file is not an envelope.
  FlickerResult invoke(const pal::PalEnvelope& input, const std::optional<Nonce>& attest_nonce = {});

  // Called after the input file is written / after the PAL wrote the output
  // file. Used by the harness to tamper with the files.
  void set_input_hook(FileHook hook);
  void set_output_hook(FileHook hook);
  // Sees the file contents as the PAL read and the proxy read them.
  void set_envelope_observer(EnvelopeObserver observer);

  std::filesystem::path input_path() const { return workdir_ / "pal_input.bin"; }
  std::filesystem::path output_path() const { return workdir_ / "pal_output.bin"; }

 private:
  tpm::TpmEmulator& tpm_;
  const ArtifactStore& artifacts_;
  std::filesystem::path workdir_;
  std::mutex mu_;
  FileHook input_hook_;
  FileHook output_hook_;
  EnvelopeObserver observer_;
};

}  // namespace tim::proxy
