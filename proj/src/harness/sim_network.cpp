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
#include "tim/harness/sim_network.hpp"

#include "tim/error.hpp"

namespace tim::harness {

namespace {

constexpr std::string_view kTranscriptMagic = "TIMT";
constexpr std::uint16_t kTranscriptVersion = 1;

wire::Frame unavailable(std::string_view to, std::string_view detail) {
  wire::Frame f;
  f.kind = wire::kind::kError;
  f.body = wire::error_body(TimError(Errc::target_unavailable, std::string(to) + ": " + std::string(detail), "network"))
               .encode();
  return f;
}

}  // namespace

void SimNetwork::add_endpoint(std::string name, Handler handler) {
  std::lock_guard lock(mu_);
  endpoints_[std::move(name)] = std::move(handler);
}

void SimNetwork::remove_endpoint(std::string_view name) {
  std::lock_guard lock(mu_);
  if (auto it = endpoints_.find(name); it != endpoints_.end()) endpoints_.erase(it);
}

bool SimNetwork::has_endpoint(std::string_view name) const {
  std::lock_guard lock(mu_);
  return endpoints_.find(name) != endpoints_.end();
}

void SimNetwork::add_tap(Tap tap) {
  std::lock_guard lock(mu_);
  taps_.push_back(std::move(tap));
}

void SimNetwork::clear_taps() {
  std::lock_guard lock(mu_);
  taps_.clear();
}

wire::Frame SimNetwork::call(std::string_view from, std::string_view to, std::string_view kind, const Fields& body) {
  wire::Frame f;
  f.from = std::string(from);
  f.to = std::string(to);
  f.kind = std::string(kind);
  f.body = body.encode();
  return deliver(std::move(f), false);
}

wire::Frame SimNetwork::inject(wire::Frame request) { return deliver(std::move(request), true); }

wire::Frame SimNetwork::run_taps(Direction direction, wire::Frame frame, bool& dropped) {
  std::vector<Tap> taps;
  {
    std::lock_guard lock(mu_);
    taps = taps_;
  }
  for (const Tap& tap : taps) {
    TapContext ctx{direction, frame};
    tap(ctx);
    if (ctx.drop) {
      dropped = true;
      break;
    }
  }
  return frame;
}

void SimNetwork::record(Direction direction, bool injected, const wire::Frame& frame) {
  std::lock_guard lock(mu_);
  transcript_.push_back({direction, injected, frame});
}

wire::Frame SimNetwork::deliver(wire::Frame request, bool injected) {
  {
    std::lock_guard lock(mu_);
    request.seq = next_seq_++;
    request.correlation = request.seq;
  }
  bool dropped = false;
  request = run_taps(Direction::request, std::move(request), dropped);
  record(Direction::request, injected, request);

  wire::Frame reply;
  Handler handler;
  {
    std::lock_guard lock(mu_);
    if (auto it = endpoints_.find(request.to); it != endpoints_.end()) handler = it->second;
  }
  if (dropped) {
    reply = unavailable(request.to, "request dropped");
  } else if (!handler) {
    reply = unavailable(request.to, "no such endpoint");
  } else {
    try {
      reply = handler(request);
    } catch (const TimError& e) {
      reply = wire::Frame{};
      reply.kind = wire::kind::kError;
      reply.body = wire::error_body(e).encode();
    }
  }
  {
    std::lock_guard lock(mu_);
    reply.seq = next_seq_++;
  }
  reply.correlation = request.seq;
  reply.from = request.to;
  reply.to = request.from;
  bool reply_dropped = false;
  reply = run_taps(Direction::reply, std::move(reply), reply_dropped);
  if (reply_dropped) {
    wire::Frame lost = unavailable(request.to, "reply dropped");
    lost.seq = reply.seq;
    lost.correlation = reply.correlation;
    lost.from = reply.from;
    lost.to = reply.to;
    reply = std::move(lost);
  }
  record(Direction::reply, injected, reply);
  return reply;
}

std::vector<TranscriptEntry> SimNetwork::transcript() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

std::size_t SimNetwork::transcript_size() const {
  std::lock_guard lock(mu_);
  return transcript_.size();
}

Bytes encode_transcript(const std::vector<RecordedRun>& runs) {
  Writer w;
  w.raw(as_bytes(kTranscriptMagic)).u16(kTranscriptVersion).u32(static_cast<std::uint32_t>(runs.size()));
  for (const auto& run : runs) {
    w.str(run.scenario).str(run.outcome).str(run.step).u32(static_cast<std::uint32_t>(run.entries.size()));
    for (const auto& e : run.entries)
      w.u8(static_cast<std::uint8_t>(e.direction)).u8(e.injected ? 1 : 0).blob(e.frame.encode());
  }
  return std::move(w).bytes();
}

std::vector<RecordedRun> decode_transcript(ByteView in) {
  Reader r(in);
  if (to_string(r.raw(4)) != kTranscriptMagic) throw TimError(Errc::format_error, "not a transcript file");
  if (std::uint16_t v = r.u16(); v != kTranscriptVersion)
    throw TimError(Errc::format_error, "unsupported transcript version " + std::to_string(v));
  std::vector<RecordedRun> runs(r.u32());
  for (auto& run : runs) {
    run.scenario = r.str();
    run.outcome = r.str();
    run.step = r.str();
    run.entries.resize(r.u32());
    for (auto& e : run.entries) {
      std::uint8_t d = r.u8();
      if (d != 1 && d != 2) throw TimError(Errc::format_error, "bad transcript direction");
      e.direction = static_cast<Direction>(d);
      e.injected = r.u8() == 1;
      e.frame = wire::Frame::decode(r.blob());
    }
  }
  r.expect_done("transcript");
  return runs;
}

std::string_view frame_step(const TranscriptEntry& entry) {
  namespace k = wire::kind;
  static const std::map<std::string_view, std::string_view> kSteps{
      {k::kTunnelRequest, "secure-tunnel.1a"}, {k::kTunnelOffer, "secure-tunnel.5a"},
      {k::kRegisterSubmit, "registration.3b"}, {k::kRegisterDone, "registration.7a"},
      {k::kAuthSubmit, "authentication.3c"},   {k::kAuthDone, "authentication.6b"},
      {k::kPageEnroll, "enrollment.10a"},      {k::kPageSubmit, "submission.9a"},
      {k::kPageUpdate, "update.11a"},
  };
  auto it = kSteps.find(entry.frame.kind);
  // Page and site frames are shared by the three credential protocols.
  return it == kSteps.end() ? std::string_view(entry.frame.kind) : it->second;
}

}  // namespace tim::harness
