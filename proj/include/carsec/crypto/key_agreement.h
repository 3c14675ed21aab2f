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

// Diffie-Hellman agreement and key encapsulation. Session keys are
// transported either as an RSA-KEM ciphertext or as a DH share; both sit
// behind the same encapsulate/decapsulate contract so a session can pick
// either one.

#ifndef CARSEC_CRYPTO_KEY_AGREEMENT_H_
#define CARSEC_CRYPTO_KEY_AGREEMENT_H_

#include <cstdint>
#include <variant>

#include "absl/status/statusor.h"
#include "carsec/crypto/big_num.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/ec.h"
#include "carsec/crypto/rng.h"
#include "carsec/crypto/symmetric.h"

namespace carsec::crypto {

struct DhShare {
  BigNum scalar;
  EcPoint point;
};

DhShare DhKeygen(const EcGroup& group, Rng& rng);

// Session key = Hash("dh-session" || compressed(scalar * peer)). Rejects the
// point at infinity as a peer share or as the result.
absl::StatusOr<SymmetricKey> DhCombine(const BigNum& my_scalar,
                                       const EcPoint& their_point);

enum class KemKind : uint8_t {
  kRsa = 1,
  kDh = 2,
};

struct RsaKemSecret {
  BigNum n;
  BigNum d;
};

struct DhKemSecret {
  Curve curve;
  BigNum scalar;
};

// Ephemeral encapsulation key pair. The public half is an opaque byte string
// that starts with the KemKind tag.
class KemKeyPair {
 public:
  static absl::StatusOr<KemKeyPair> GenerateRsa(int modulus_bits, Rng& rng);
  static KemKeyPair GenerateDh(Curve curve, Rng& rng);

  KemKind kind() const;
  const Bytes& public_key() const { return public_key_; }
  const std::variant<RsaKemSecret, DhKemSecret>& secret() const {
    return secret_;
  }

 private:
  KemKeyPair(Bytes public_key, std::variant<RsaKemSecret, DhKemSecret> secret)
      : public_key_(std::move(public_key)), secret_(std::move(secret)) {}

  Bytes public_key_;
  std::variant<RsaKemSecret, DhKemSecret> secret_;
};

struct Encapsulation {
  SymmetricKey shared;
  Bytes ciphertext;
};

inline constexpr uint64_t kRsaKemExponent = 65537;
inline constexpr size_t kKemConfirmSize = 16;

// Ciphertext layout: body || confirm(16), where body is x^e mod n (RSA,
// fixed width) or the compressed ephemeral share (DH), and confirm is a
// truncated MAC under the shared key, letting decapsulation fail loudly.
absl::StatusOr<Encapsulation> KemEncapsulate(ByteSpan public_key, Rng& rng);
absl::StatusOr<SymmetricKey> KemDecapsulate(const KemKeyPair& key_pair,
                                            ByteSpan ciphertext);

}  // namespace carsec::crypto

#endif  // CARSEC_CRYPTO_KEY_AGREEMENT_H_
