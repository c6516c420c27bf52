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

#include "tim/crypto/certificate.hpp"

#include "tim/codec.hpp"
#include "tim/error.hpp"

namespace tim::crypto {

Bytes Certificate::signed_payload() const {
  Writer w;
  w.u8(1).str(subject).blob(public_key.encode()).fixed(issuer_key_id);
  return std::move(w).bytes();
}

Bytes Certificate::encode() const {
  Writer w;
  w.blob(signed_payload()).blob(signature);
  return std::move(w).bytes();
}

Certificate Certificate::decode(ByteView in) {
  Reader outer(in);
  ByteView payload = outer.blob();
  ByteView sig = outer.blob();
  outer.expect_done("certificate");

  Reader r(payload);
  if (r.u8() != 1) throw TimError(Errc::format_error, "unsupported certificate version");
  Certificate c;
  c.subject = r.str();
  c.public_key = PublicKey::decode(r.blob());
  c.issuer_key_id = r.fixed<Digest>();
  r.expect_done("certificate payload");
  c.signature.assign(sig.begin(), sig.end());
  return c;
}

bool verify_certificate(const Certificate& cert, const PublicKey& ca_public) noexcept {
  try {
    if (cert.issuer_key_id != ca_public.key_id()) return false;
    return verify(ca_public, cert.signed_payload(), cert.signature);
  } catch (...) {
    return false;
  }
}

Certificate CertificateAuthority::issue(std::string subject, const PublicKey& subject_key) const {
  Certificate c;
  c.subject = std::move(subject);
  c.public_key = subject_key;
  c.issuer_key_id = key_.key_id();
  c.signature = sign(key_, c.signed_payload());
  return c;
}

}  // namespace tim::crypto
