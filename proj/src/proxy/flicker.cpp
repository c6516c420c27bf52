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
#include "tim/proxy/flicker.hpp"

#include "tim/error.hpp"
#include "tim/file_io.hpp"
#include "tim/pal/pal.hpp"

namespace tim::proxy {
namespace {

// Closes the late-launch session on every exit path.
class DrtmSession {
 public:
  DrtmSession(tpm::TpmEmulator& tpm, ByteView pal_image) : tpm_(tpm) { tpm_.drtm_launch(pal_image); }
  ~DrtmSession() { tpm_.drtm_close(); }
  DrtmSession(const DrtmSession&) = delete;
  DrtmSession& operator=(const DrtmSession&) = delete;

 private:
  tpm::TpmEmulator& tpm_;
};

}  // namespace

Flicker::Flicker(tpm::TpmEmulator& tpm, const ArtifactStore& artifacts, std::filesystem::path workdir)
    : tpm_(tpm), artifacts_(artifacts), workdir_(std::move(workdir)) {
  std::filesystem::create_directories(workdir_);
}

void Flicker::set_input_hook(FileHook hook) {
  std::lock_guard lock(mu_);
  input_hook_ = std::move(hook);
}

void Flicker::set_output_hook(FileHook hook) {
  std::lock_guard lock(mu_);
  output_hook_ = std::move(hook);
}

void Flicker::set_envelope_observer(EnvelopeObserver observer) {
  std::lock_guard lock(mu_);
  observer_ = std::move(observer);
}

FlickerResult Flicker::invoke(const pal::PalEnvelope& input, const std::optional<Nonce>& attest_nonce) {
  std::lock_guard lock(mu_);
  const auto in_path = input_path();
  const auto out_path = output_path();
  std::filesystem::remove(out_path);
  write_file_atomic(in_path, input.encode());
  if (input_hook_) input_hook_(in_path);

  FlickerResult result;
  {
    // Suspend, late launch, PAL, resume.
    Bytes pal_image = artifacts_.get(Module::pal);
    Bytes flicker_image = artifacts_.get(Module::flicker);
    Bytes proxy_image = artifacts_.get(Module::proxy);
    DrtmSession session(tpm_, pal_image);
    pal::run_pal_files(tpm_, {flicker_image, proxy_image}, in_path, out_path);
    if (attest_nonce) {
      result.attestation = Attestation{tpm_.quote(tpm::kDrtmPcr, *attest_nonce),
                                       tpm_.measurement_log(tpm::kDrtmPcr)};
    }
  }

  if (output_hook_) output_hook_(out_path);
  Bytes out = read_file(out_path);
  if (observer_) observer_(read_file(in_path), out);
  try {
    result.output = pal::PalEnvelope::decode(out);
  } catch (const TimError& e) {
    throw TimError(Errc::protocol_violation, std::string("unreadable PAL output: ") + e.what(), "flicker.output");
  }
  std::filesystem::remove(in_path);
  std::filesystem::remove(out_path);
  return result;
}

}  // namespace tim::proxy
