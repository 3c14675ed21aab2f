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

// Hash, MAC and authenticated symmetric encryption. SHA-256, HMAC-SHA-256
// and AES-256-GCM, all through OpenSSL.

#ifndef CARSEC_CRYPTO_SYMMETRIC_H_
#define CARSEC_CRYPTO_SYMMETRIC_H_

#include <array>
#include <initializer_list>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"

namespace carsec::crypto {

inline constexpr size_t kDigestSize = 32;
inline constexpr size_t kKeySize = 32;
inline constexpr size_t kMacSize = 32;
inline constexpr size_t kAeadNonceSize = 12;
inline constexpr size_t kAeadTagSize = 16;
inline constexpr size_t kAeadOverhead = kAeadNonceSize + kAeadTagSize;

using Digest = std::array<uint8_t, kDigestSize>;

Digest Hash(ByteSpan data);
// Hash of the concatenation of `parts`.
Digest Hash(std::initializer_list<ByteSpan> parts);

// 32-byte secret. Holds no public constructor from raw memory other than
// FromBytes so that length is always checked.
class SymmetricKey {
 public:
  static SymmetricKey Random(Rng& rng);
  static absl::StatusOr<SymmetricKey> FromBytes(ByteSpan bytes);
  // Key derived as Hash(label || material).
  static SymmetricKey Derive(std::string_view label, ByteSpan material);

  ByteSpan bytes() const { return key_; }

  friend bool operator==(const SymmetricKey& a, const SymmetricKey& b) {
    return a.key_ == b.key_;
  }

 private:
  SymmetricKey() = default;
  std::array<uint8_t, kKeySize> key_{};
};

using MacTag = std::array<uint8_t, kMacSize>;

MacTag MacSign(const SymmetricKey& key, ByteSpan msg);
bool MacVerify(const SymmetricKey& key, ByteSpan msg, ByteSpan tag);

// Output layout: nonce(12) || ciphertext || tag(16). The nonce is drawn
// from `rng`.
Bytes SymEncrypt(const SymmetricKey& key, ByteSpan plaintext, Rng& rng);
// Fails with kDataLoss on any authentication failure or short input.
absl::StatusOr<Bytes> SymDecrypt(const SymmetricKey& key, ByteSpan sealed);

// Constant-time comparison of equal-length buffers; false on length
// mismatch.
bool ConstantTimeEquals(ByteSpan a, ByteSpan b);

}  // namespace carsec::crypto

#endif  // CARSEC_CRYPTO_SYMMETRIC_H_
