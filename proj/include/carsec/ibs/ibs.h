/*
 * Copyright 2026 The carsec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Identity-based signatures over an RSA modulus: Shamir's original scheme
// and Guillou-Quisquater. A key-generation authority holding the master key
// extracts a user's signing key from the user's identity string; anyone
// holding the public parameters verifies against the identity alone.
//
// Both schemes share the same four operations (Setup, KeyDer, Sign, Verify)
// and the same canonical signature encoding: two fixed-width big-endian
// components, each as wide as the modulus.
//
//   Shamir   user secret  g = h(I)^d                 (e*d = 1 mod phi)
//            sign         t = r^e, c = H(t || m), s = g * r^c
//            verify       s^e == h(I) * t^c
//   GQ       user secret  B = J^(-1/v)               (B^v * J = 1)
//            sign         T = r^v, c = H(m), d = J^c * T^v, t = r * B^d
//            verify       T' = J^d * t^v, accept iff J^c * T'^v == d
//
// Hash outputs used as exponents are reduced mod n.

#ifndef CARSEC_IBS_IBS_H_
#define CARSEC_IBS_IBS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "carsec/crypto/big_num.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"

namespace carsec::ibs {

using crypto::BigNum;

enum class Scheme : uint8_t {
  kShamir = 1,
  kGq = 2,
};

std::string SchemeName(Scheme scheme);
absl::StatusOr<Scheme> ParseScheme(const std::string& name);

inline constexpr int kTestModulusBits = 512;
inline constexpr int kDefaultModulusBits = 2048;
inline constexpr uint64_t kDefaultShamirExponent = 65537;

struct SetupOptions {
  Scheme scheme = Scheme::kShamir;
  int modulus_bits = kDefaultModulusBits;
  // Shamir e or GQ v. Defaults: e = 65537, v uniform in Z_n.
  std::optional<BigNum> exponent;
};

// Global public parameters {n, e} (Shamir) or {n, v} (GQ).
struct PublicParams {
  Scheme scheme;
  BigNum n;
  BigNum exponent;

  // Byte width of one signature component.
  size_t width() const { return n.ByteLength(); }
};

struct MasterKey {
  PublicParams params;
  // e^-1 or v^-1 mod phi(n).
  BigNum secret_exponent;
};

struct UserKey {
  PublicParams params;
  Bytes identity;
  // h(I) for Shamir, J for GQ.
  BigNum identity_element;
  // h(I)^d for Shamir, B for GQ.
  BigNum secret;
};

// (s, t) for Shamir, (d, t) for GQ.
struct Signature {
  BigNum first;
  BigNum second;

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline constexpr size_t kTruncatedSize = 8;
using TruncatedSignature = std::array<uint8_t, kTruncatedSize>;

absl::StatusOr<MasterKey> Setup(const SetupOptions& options,
                                crypto::Rng& rng);

// Setup over caller-chosen primes. An exponent sharing a factor with phi(n)
// is rejected and a fresh one is drawn from `rng`.
absl::StatusOr<MasterKey> SetupFromPrimes(Scheme scheme, const BigNum& p,
                                          const BigNum& q,
                                          const BigNum& exponent,
                                          crypto::Rng& rng);

// Hash of the identity reduced mod n. When the value is not a unit, a
// one-byte counter is appended and the identity rehashed.
absl::StatusOr<BigNum> IdentityElement(const BigNum& n, ByteSpan identity);

absl::StatusOr<UserKey> KeyDer(const MasterKey& msk, ByteSpan identity);
// KeyDer with the identity map bypassed; `element` must be a unit mod n.
absl::StatusOr<UserKey> KeyDerForElement(const MasterKey& msk,
                                         ByteSpan identity,
                                         const BigNum& element);

Signature Sign(const UserKey& key, ByteSpan msg, crypto::Rng& rng);
// Sign with a fixed commitment randomness `r` (a unit mod n).
Signature SignWithCommitment(const UserKey& key, ByteSpan msg,
                             const BigNum& r);

// Message hash as an exponent: H(t || m) mod n for Shamir (t encoded at
// the modulus width), H(m) mod n for GQ (t ignored).
BigNum MessageExponent(const PublicParams& params, const BigNum& t,
                       ByteSpan msg);

// Total on arbitrary input: components out of range give false.
bool Verify(const PublicParams& params, ByteSpan identity, ByteSpan msg,
            const Signature& sig);
bool VerifyForElement(const PublicParams& params, const BigNum& element,
                      ByteSpan msg, const Signature& sig);
bool VerifyEncoded(const PublicParams& params, ByteSpan identity,
                   ByteSpan msg, ByteSpan encoded);

Bytes EncodeSignature(const PublicParams& params, const Signature& sig);
absl::StatusOr<Signature> DecodeSignature(const PublicParams& params,
                                          ByteSpan encoded);

// Last 64 bits of a canonical signature encoding. Encodings shorter than
// eight bytes are left-padded with zeros.
TruncatedSignature Truncate64(ByteSpan encoded);

namespace gq {

// T' = J^d * t^v mod n. Equals the signer's T for honest signatures.
BigNum RecomputeCommitment(const PublicParams& params, const BigNum& j,
                           const Signature& sig);
// d'' = J^(c + d*v) * t^(v^2) mod n, the closing value of the textbook
// check d' == d''. It equals d' for every (d, t), which is why Verify
// compares against the received d instead.
BigNum ClosingValue(const PublicParams& params, const BigNum& j,
                    const BigNum& c, const Signature& sig);

}  // namespace gq

// Key files (see wire/tlv.h for the container).
Bytes EncodePublicParams(const PublicParams& params);
absl::StatusOr<PublicParams> DecodePublicParams(ByteSpan file);
Bytes EncodeMasterKey(const MasterKey& key);
absl::StatusOr<MasterKey> DecodeMasterKey(ByteSpan file);
Bytes EncodeUserKey(const UserKey& key);
absl::StatusOr<UserKey> DecodeUserKey(ByteSpan file);

}  // namespace carsec::ibs

#endif  // CARSEC_IBS_IBS_H_
