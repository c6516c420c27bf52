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

// Attack scenarios as scripts over a fixed set of harness primitives.
//
// Script syntax: one primitive per line, arguments separated by blanks,
// '#' starts a comment. Example:
//
//   boot
//   add-client alice alice
//   tamper proxy
//   register alice master-pw phrase

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tim/error.hpp"
#include "tim/harness/leak_detector.hpp"
#include "tim/harness/sim_network.hpp"
#include "tim/tpm/emulator.hpp"

namespace tim::harness {

class World;

enum class Outcome {
  flow_succeeds,
  detected_at_boot,
  attestation_failure,
  seal_violation,
  replay_rejected,
  tunnel_refused,
  certificate_rejected,
  credential_access_denied,
  key_provenance_rejected,
  authentication_refused,
  other_error,
  check_failed,
};

std::string_view outcome_name(Outcome o) noexcept;
std::optional<Outcome> outcome_from_name(std::string_view name) noexcept;
// seal_violation, integrity_failure and unknown_blob all map to
// Outcome::seal_violation.
Outcome classify(Errc code) noexcept;

// The script itself is broken: unknown primitive, wrong arity, or a
// reference to an entity the script never created.
class ScenarioInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scripted expectation (expect-*) did not hold.
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScriptStep {
  std::string primitive;
  std::vector<std::string> args;
  std::size_t line = 0;
};

struct Scenario {
  std::string name;
  std::string description;
  Outcome expected = Outcome::flow_succeeds;
  // Step label at which the failure must be detected; empty for flows that
  // succeed.
  std::string expected_step;
  std::vector<ScriptStep> script;
  bool attack = true;
};

// Throws ScenarioInvalid.
std::vector<ScriptStep> parse_script(std::string_view text);

struct Primitive {
  std::string name;
  std::size_t arity = 0;
  std::string usage;
  std::function<void(World&, const std::vector<std::string>&)> run;
};

const std::vector<Primitive>& primitives();

enum class Verdict { passed, failed, invalid };
std::string_view verdict_name(Verdict v) noexcept;

struct Report {
  std::string scenario;
  Verdict verdict = Verdict::invalid;
  Outcome expected = Outcome::flow_succeeds;
  Outcome observed = Outcome::flow_succeeds;
  std::string expected_step;
  std::string step;
  std::string detail;
  // Script line that raised the error, and the last transcript frame before
  // detection.
  std::optional<std::size_t> script_index;
  std::optional<std::size_t> frame_index;
  std::vector<TranscriptEntry> transcript;
  std::vector<tpm::PcrEvent> pcr_history;
  std::vector<LeakFinding> leaks;
  std::size_t stored_records = 0;
};

// Passes iff the observed outcome and step equal the expected ones and the
// leak detector found nothing.
Report run_scenario(const Scenario& scenario, std::uint64_t seed);
// Runs against a caller-owned world, which stays inspectable afterwards.
Report run_scenario(const Scenario& scenario, World& world);

std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin(std::string_view name);

RecordedRun to_recorded_run(const Report& report);

}  // namespace tim::harness
