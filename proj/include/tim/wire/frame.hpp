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

// Messages between client, proxy and target sites. A frame is a tagged
// message whose body is a canonical Fields encoding.
//
// Frame encoding: u8 version (1) | u64 seq | u64 correlation | str from |
// str to | str kind | u32 len | body. On a byte stream each frame is
// preceded by its u32 length. The message catalog is in docs/protocols.md.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tim/codec.hpp"
#include "tim/error.hpp"

namespace tim::wire {

namespace kind {
inline constexpr std::string_view kTunnelRequest = "tunnel.request";
inline constexpr std::string_view kTunnelOffer = "tunnel.offer";
inline constexpr std::string_view kRegisterSubmit = "register.submit";
inline constexpr std::string_view kRegisterDone = "register.done";
inline constexpr std::string_view kAuthSubmit = "auth.submit";
inline constexpr std::string_view kAuthDone = "auth.done";
inline constexpr std::string_view kPageVisit = "page.visit";
inline constexpr std::string_view kPageRender = "page.render";
inline constexpr std::string_view kPageEnroll = "page.enroll";
inline constexpr std::string_view kPageSubmit = "page.submit";
inline constexpr std::string_view kPageUpdate = "page.update";
inline constexpr std::string_view kPageResult = "page.result";
inline constexpr std::string_view kSiteHello = "site.hello";
inline constexpr std::string_view kSitePage = "site.page";
inline constexpr std::string_view kSiteSubmit = "site.submit";
inline constexpr std::string_view kSiteResult = "site.result";
inline constexpr std::string_view kError = "error";
}  // namespace kind

struct Frame {
  std::uint64_t seq = 0;
  std::uint64_t correlation = 0;
  std::string from;
  std::string to;
  std::string kind;
  Bytes body;

  Fields fields() const { return Fields::decode(body); }

  Bytes encode() const;
  static Frame decode(ByteView in);

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Body of an "error" frame: {code, step, detail}.
Fields error_body(const TimError& error);
TimError error_from_body(const Fields& body);

// Request/response transport. The reply's correlation equals the request's.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Frame call(std::string_view from, std::string_view to, std::string_view kind, const Fields& body) = 0;
};

// Calls and unwraps: rethrows error frames as TimError and rejects replies of
// any other kind than expected_kind (protocol_violation).
Fields request(Transport& transport, std::string_view from, std::string_view to, std::string_view kind,
               const Fields& body, std::string_view expected_kind);

}  // namespace tim::wire
