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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tim {

// Error codes shared by every module. The names (see errc_name) also travel
// over the wire inside error frames and PAL error envelopes.
enum class Errc {
  usage,
  format_error,
  io_error,
  integrity_failure,
  seal_violation,
  unknown_blob,
  exclusivity,
  key_provenance,
  replay,
  exhausted_chain,
  boot_refused,
  schema_violation,
  attestation_failure,
  tunnel_refused,
  certificate_rejected,
  authentication_refused,
  not_authenticated,
  no_record,
  target_rejected,
  target_unavailable,
  credential_access_denied,
  protocol_violation,
};

std::string_view errc_name(Errc code) noexcept;
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

class TimError : public std::runtime_error {
 public:
  TimError(Errc code, std::string message, std::string step = {})
      : std::runtime_error(std::move(message)), code_(code), step_(std::move(step)) {}

  Errc code() const noexcept { return code_; }
  // Protocol step at which the error was raised, e.g. "credential-decryption.3a".
  // Empty for errors outside a protocol run.
  const std::string& step() const noexcept { return step_; }

 private:
  Errc code_;
  std::string step_;
};

}  // namespace tim
