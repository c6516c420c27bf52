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

// In-process network between clients, the proxy and target sites. Every
// frame passes the installed taps in order and is appended to the
// transcript, so attacks are expressed as taps and replays.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tim/wire/frame.hpp"

namespace tim::harness {

enum class Direction : std::uint8_t { request = 1, reply = 2 };

struct TranscriptEntry {
  Direction direction = Direction::request;
  // Delivered by the harness rather than by an honest party.
  bool injected = false;
  wire::Frame frame;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct TapContext {
  Direction direction;
  wire::Frame& frame;
  bool drop = false;
};

// May observe, rewrite or drop the frame in flight.
using Tap = std::function<void(TapContext&)>;
// Returns the reply body and kind; routing fields are filled by the network.
using Handler = std::function<wire::Frame(const wire::Frame&)>;

class SimNetwork : public wire::Transport {
 public:
  void add_endpoint(std::string name, Handler handler);
  void remove_endpoint(std::string_view name);
  bool has_endpoint(std::string_view name) const;

  void add_tap(Tap tap);
  void clear_taps();

  // A missing endpoint or a dropped frame yields an error frame with
  // target_unavailable.
  wire::Frame call(std::string_view from, std::string_view to, std::string_view kind, const Fields& body) override;

  // Delivers `request` as-is (sequence number aside) and records both frames
  // as injected.
  wire::Frame inject(wire::Frame request);

  std::vector<TranscriptEntry> transcript() const;
  std::size_t transcript_size() const;

 private:
  wire::Frame deliver(wire::Frame request, bool injected);
  wire::Frame run_taps(Direction direction, wire::Frame frame, bool& dropped);
  void record(Direction direction, bool injected, const wire::Frame& frame);

  mutable std::mutex mu_;
  std::map<std::string, Handler, std::less<>> endpoints_;
  std::vector<Tap> taps_;
  std::vector<TranscriptEntry> transcript_;
  std::uint64_t next_seq_ = 1;
};

// One scenario's frames, as stored in a transcript file.
struct RecordedRun {
  std::string scenario;
  std::string outcome;
  std::string step;
  std::vector<TranscriptEntry> entries;

  friend bool operator==(const RecordedRun&, const RecordedRun&) = default;
};

// "TIMT" | u16 version (1) | u32 runs | per run: str scenario, str outcome,
// str step, u32 entries, per entry: u8 direction, u8 injected, blob frame.
Bytes encode_transcript(const std::vector<RecordedRun>& runs);
std::vector<RecordedRun> decode_transcript(ByteView in);

// Protocol step a frame belongs to, e.g. "secure-tunnel.1a", or the frame
// kind when several protocols share it.
std::string_view frame_step(const TranscriptEntry& entry);

}  // namespace tim::harness
