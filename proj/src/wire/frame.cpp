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
#include "tim/wire/frame.hpp"

namespace tim::wire {
namespace {

constexpr std::uint8_t kVersion = 1;

}  // namespace

Bytes Frame::encode() const {
  Writer w;
  w.u8(kVersion).u64(seq).u64(correlation).str(from).str(to).str(kind).blob(body);
  return std::move(w).bytes();
}

Frame Frame::decode(ByteView in) {
  Reader r(in);
  if (r.u8() != kVersion) throw TimError(Errc::format_error, "unsupported frame version");
  Frame f;
  f.seq = r.u64();
  f.correlation = r.u64();
  f.from = r.str();
  f.to = r.str();
  f.kind = r.str();
  ByteView body = r.blob();
  f.body.assign(body.begin(), body.end());
  r.expect_done("frame");
  return f;
}

Fields error_body(const TimError& error) {
  Fields f;
  f.set("code", errc_name(error.code()));
  f.set("step", error.step());
  f.set("detail", std::string_view(error.what()));
  return f;
}

TimError error_from_body(const Fields& body) {
  auto code = errc_from_name(body.has("code") ? body.get_string("code") : "");
  return TimError(code.value_or(Errc::protocol_violation),
                  body.has("detail") ? body.get_string("detail") : "remote error",
                  body.has("step") ? body.get_string("step") : "");
}

Fields request(Transport& transport, std::string_view from, std::string_view to, std::string_view kind,
               const Fields& body, std::string_view expected_kind) {
  Frame reply = transport.call(from, to, kind, body);
  Fields fields;
  try {
    fields = reply.fields();
  } catch (const TimError& e) {
    throw TimError(Errc::protocol_violation, std::string("malformed reply: ") + e.what());
  }
  if (reply.kind == kind::kError) throw error_from_body(fields);
  if (reply.kind != expected_kind) {
    throw TimError(Errc::protocol_violation,
                   "expected " + std::string(expected_kind) + " reply, got " + reply.kind);
  }
  return fields;
}

}  // namespace tim::wire
