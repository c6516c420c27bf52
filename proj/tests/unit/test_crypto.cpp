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
#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tim/codec.hpp"
#include "tim/crypto/certificate.hpp"
#include "tim/crypto/hash.hpp"
#include "tim/crypto/keys.hpp"
#include "tim/crypto/rng.hpp"

namespace tim {
namespace {

using testing::OracleSha1;

TEST(Bytes, HexRoundTrip) {
  Bytes b{0x00, 0x7f, 0xff, 0x10};
  EXPECT_EQ(to_hex(b), "007fff10");
  EXPECT_EQ(from_hex("007fff10"), b);
  EXPECT_EQ(from_hex("007FFF10"), b);
  EXPECT_TIM_ERROR(from_hex("abc"), Errc::format_error);
  EXPECT_TIM_ERROR(from_hex("zz"), Errc::format_error);
}

TEST(Bytes, FixedSizeIsChecked) {
  EXPECT_TIM_ERROR(Digest::from(Bytes(19)), Errc::format_error);
  EXPECT_TRUE(Digest{}.is_zero());
}

TEST(Bytes, ConstantTimeEqual) {
  Bytes a{1, 2, 3};
  EXPECT_TRUE(constant_time_equal(a, Bytes{1, 2, 3}));
  EXPECT_FALSE(constant_time_equal(a, Bytes{1, 2, 4}));
  EXPECT_FALSE(constant_time_equal(a, Bytes{1, 2}));
}

TEST(Codec, WriterReaderRoundTrip) {
  Writer w;
  w.u8(1).u16(0x0203).u32(0x04050607).u64(0x08090a0b0c0d0e0full).blob(Bytes{9, 9}).str("hi");
  Bytes out = std::move(w).bytes();
  EXPECT_EQ(to_hex(ByteView(out).first(15)), "0102030405060708090a0b0c0d0e0f");
  Reader r(out);
  EXPECT_EQ(r.u8(), 1);
  EXPECT_EQ(r.u16(), 0x0203);
  EXPECT_EQ(r.u32(), 0x04050607u);
  EXPECT_EQ(r.u64(), 0x08090a0b0c0d0e0full);
  ByteView blob = r.blob();
  EXPECT_EQ(Bytes(blob.begin(), blob.end()), (Bytes{9, 9}));
  EXPECT_EQ(r.str(), "hi");
  EXPECT_TRUE(r.done());
}

TEST(Codec, TruncationIsAFormatError) {
  Bytes out = Writer().str("hello").bytes();
  out.pop_back();
  Reader r(out);
  EXPECT_TIM_ERROR(r.str(), Errc::format_error);
}

TEST(Fields, CanonicalEncodingIsNameSorted) {
  Fields a;
  a.set("zeta", "1").set("alpha", "2");
  Fields b;
  b.set("alpha", "2").set("zeta", "1");
  EXPECT_EQ(a.encode(), b.encode());
  // u32 count, then u16 name len, name, u32 value len, value.
  EXPECT_EQ(to_hex(a.encode()), "00000002" "0005616c706861" "0000000132" "00047a657461" "0000000131");
  EXPECT_EQ(Fields::decode(a.encode()), a);
}

TEST(Fields, DecodeRejectsNonCanonicalInput) {
  Bytes unsorted = Writer().u32(2).str("b").blob(Bytes{1}).str("a").blob(Bytes{2}).bytes();
  EXPECT_TIM_ERROR(Fields::decode(unsorted), Errc::format_error);
  Bytes dup = Writer().u32(2).str("a").blob(Bytes{1}).str("a").blob(Bytes{2}).bytes();
  EXPECT_TIM_ERROR(Fields::decode(dup), Errc::format_error);
  Fields one;
  one.set("a", "x");
  Bytes trailing = one.encode();
  trailing.push_back(0);
  EXPECT_TIM_ERROR(Fields::decode(trailing), Errc::format_error);
}

TEST(Fields, MissingFieldIsASchemaViolation) {
  Fields f;
  EXPECT_TIM_ERROR(f.get("nope"), Errc::schema_violation);
  EXPECT_FALSE(f.find("nope").has_value());
}

TEST(Fields, ClearWipesValues) {
  Fields f;
  f.set("password", "hunter2");
  f.clear();
  EXPECT_TRUE(f.empty());
}

TEST(Hash, KnownAnswers) {
  EXPECT_EQ(crypto::hash("").hex(), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  EXPECT_EQ(crypto::hash("abc").hex(), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(crypto::hash("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").hex(),
            "84983e441c3bd26ebaae4aa1f95129e5e54670f1");
  EXPECT_EQ(crypto::hash(std::string(1000000, 'a')).hex(), "34aa973cd4c4daa4f61eeb2bdbad27316534016f");
}

TEST(Hash, AgreesWithOracleOnRandomInputs) {
  crypto::Rng rng(11, "hash-test");
  for (std::size_t len = 0; len < 300; ++len) {
    Bytes m = rng.bytes(len);
    EXPECT_EQ(crypto::hash(m), testing::to_digest(OracleSha1::of(m))) << "length " << len;
  }
}

TEST(Hash, ConcatEqualsHashOfConcatenation) {
  EXPECT_EQ(crypto::hash_concat({as_bytes("ab"), as_bytes("c")}), crypto::hash("abc"));
}

TEST(Rng, SameSeedAndStreamReplay) {
  crypto::Rng a(5, "s"), b(5, "s"), c(5, "t"), d(6, "s");
  Bytes x = a.bytes(64);
  EXPECT_EQ(x, b.bytes(64));
  EXPECT_NE(x, c.bytes(64));
  EXPECT_NE(x, d.bytes(64));
}

TEST(Rng, UniformStaysInRange) {
  crypto::Rng rng(1, "u");
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.uniform(7), 7u);
  EXPECT_TIM_ERROR(rng.uniform(0), Errc::usage);
}

TEST(Keys, EncryptDecryptRoundTrip) {
  crypto::Rng rng(1, "keys");
  auto kp = crypto::generate_keypair(crypto::KeyPurpose::pal, rng);
  Bytes ct = crypto::encrypt(kp.public_key(), as_bytes("secret"), rng);
  EXPECT_EQ(to_string(crypto::decrypt(kp, ct)), "secret");
  EXPECT_FALSE(contains_subsequence(ct, as_bytes("secret")));
}

TEST(Keys, WrongKeyOrAnyFlippedByteFails) {
  crypto::Rng rng(2, "keys");
  auto kp = crypto::generate_keypair(crypto::KeyPurpose::pal, rng);
  auto other = crypto::generate_keypair(crypto::KeyPurpose::pal, rng);
  Bytes ct = crypto::encrypt(kp.public_key(), as_bytes("payload"), rng);
  EXPECT_TIM_ERROR(crypto::decrypt(other, ct), Errc::integrity_failure);
  for (std::size_t i = 0; i < ct.size(); ++i) {
    Bytes bad = ct;
    bad[i] ^= 0x01;
    EXPECT_THROW(crypto::decrypt(kp, bad), TimError) << "byte " << i;
  }
}

TEST(Keys, EmptyPlaintextIsRefused) {
  crypto::Rng rng(3, "keys");
  auto kp = crypto::generate_keypair(crypto::KeyPurpose::pal, rng);
  EXPECT_TIM_ERROR(crypto::encrypt(kp.public_key(), ByteView{}, rng), Errc::usage);
}

TEST(Keys, GenerationIsReproducibleFromSeed) {
  crypto::Rng a(9, "k"), b(9, "k");
  EXPECT_EQ(crypto::generate_keypair(crypto::KeyPurpose::proxy, a).public_key(),
            crypto::generate_keypair(crypto::KeyPurpose::proxy, b).public_key());
}

TEST(Keys, EncodingRoundTrips) {
  crypto::Rng rng(4, "keys");
  auto kp = crypto::generate_keypair(crypto::KeyPurpose::aik, rng);
  EXPECT_EQ(crypto::PublicKey::decode(kp.public_key().encode()), kp.public_key());
  auto back = crypto::KeyPair::decode_private(kp.encode_private());
  EXPECT_EQ(back.public_key(), kp.public_key());
  EXPECT_EQ(back.purpose(), crypto::KeyPurpose::aik);
}

TEST(Keys, SignVerify) {
  crypto::Rng rng(5, "keys");
  auto kp = crypto::generate_keypair(crypto::KeyPurpose::aik, rng);
  Bytes sig = crypto::sign(kp, as_bytes("quote"));
  EXPECT_TRUE(crypto::verify(kp.public_key(), as_bytes("quote"), sig));
  EXPECT_FALSE(crypto::verify(kp.public_key(), as_bytes("quotf"), sig));
  sig[0] ^= 1;
  EXPECT_FALSE(crypto::verify(kp.public_key(), as_bytes("quote"), sig));
}

TEST(Aead, BindsAdditionalData) {
  crypto::Rng rng(6, "aead");
  Bytes key = rng.bytes(32);
  Bytes sealed = crypto::aead_seal(key, as_bytes("hdr"), as_bytes("body"), rng);
  EXPECT_EQ(to_string(crypto::aead_open(key, as_bytes("hdr"), sealed)), "body");
  EXPECT_TIM_ERROR(crypto::aead_open(key, as_bytes("hdx"), sealed), Errc::integrity_failure);
}

TEST(Certificate, IssuedCertificateVerifiesOnlyAgainstItsIssuer) {
  crypto::Rng rng(7, "ca");
  crypto::CertificateAuthority ca(rng), rogue(rng);
  auto subject = crypto::generate_keypair(crypto::KeyPurpose::site, rng);
  crypto::Certificate cert = ca.issue("site:shop", subject.public_key());
  EXPECT_TRUE(crypto::verify_certificate(cert, ca.public_key()));
  EXPECT_FALSE(crypto::verify_certificate(cert, rogue.public_key()));
  EXPECT_EQ(crypto::Certificate::decode(cert.encode()), cert);
  crypto::Certificate renamed = cert;
  renamed.subject = "site:bank";
  EXPECT_FALSE(crypto::verify_certificate(renamed, ca.public_key()));
}

}  // namespace
}  // namespace tim
