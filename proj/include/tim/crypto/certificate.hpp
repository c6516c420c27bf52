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

#include <string>

#include "tim/bytes.hpp"
#include "tim/crypto/keys.hpp"

namespace tim::crypto {

// A public key bound to a subject name by a single CA signature. Used for AIK
// certificates ("aik:<tpm id>") and for simulated target-site certificates
// (subject = site id). No chains, no validity periods.
struct Certificate {
  std::string subject;
  PublicKey public_key;
  Digest issuer_key_id;
  Bytes signature;

  // Bytes covered by the signature: u8 1, str subject, blob public key,
  // 20 issuer key id.
  Bytes signed_payload() const;
  Bytes encode() const;
  static Certificate decode(ByteView in);

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

bool verify_certificate(const Certificate& cert, const PublicKey& ca_public) noexcept;

class CertificateAuthority {
 public:
  explicit CertificateAuthority(Rng& rng) : key_(generate_keypair(KeyPurpose::ca, rng)) {}

  Certificate issue(std::string subject, const PublicKey& subject_key) const;
  const PublicKey& public_key() const noexcept { return key_.public_key(); }

 private:
  KeyPair key_;
};

}  // namespace tim::crypto
