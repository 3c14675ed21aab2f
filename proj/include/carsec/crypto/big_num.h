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

#ifndef CARSEC_CRYPTO_BIG_NUM_H_
#define CARSEC_CRYPTO_BIG_NUM_H_

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"

struct bignum_st;

namespace carsec::crypto {

// Non-negative arbitrary precision integer backed by an OpenSSL BIGNUM.
// Value semantics: copies duplicate the underlying number.
class BigNum {
 public:
  BigNum();
  explicit BigNum(uint64_t value);
  BigNum(const BigNum& other);
  BigNum(BigNum&& other) noexcept;
  BigNum& operator=(const BigNum& other);
  BigNum& operator=(BigNum&& other) noexcept;
  ~BigNum();

  // Big-endian, unsigned.
  static BigNum FromBytes(ByteSpan bytes);
  static absl::StatusOr<BigNum> FromDecimal(const std::string& decimal);

  // Minimal big-endian encoding (empty for zero).
  Bytes ToBytes() const;
  // Left-padded to exactly `width` bytes. The number must fit.
  Bytes ToBytes(size_t width) const;
  std::string ToDecimal() const;
  // Fails when the value does not fit.
  absl::StatusOr<uint64_t> ToU64() const;

  int BitLength() const;
  size_t ByteLength() const { return (BitLength() + 7) / 8; }
  bool IsZero() const;
  bool IsOne() const;
  bool IsOdd() const;

  BigNum Add(const BigNum& other) const;
  // Requires *this >= other.
  BigNum Sub(const BigNum& other) const;
  BigNum Mul(const BigNum& other) const;
  BigNum Mod(const BigNum& m) const;
  BigNum Div(const BigNum& d) const;
  BigNum ModAdd(const BigNum& other, const BigNum& m) const;
  BigNum ModSub(const BigNum& other, const BigNum& m) const;
  BigNum ModMul(const BigNum& other, const BigNum& m) const;
  BigNum ModExp(const BigNum& exponent, const BigNum& m) const;
  // nullopt when no inverse exists.
  std::optional<BigNum> ModInverse(const BigNum& m) const;
  BigNum Gcd(const BigNum& other) const;

  // Probabilistic primality, error below 2^-128.
  bool IsPrime() const;

  friend std::strong_ordering operator<=>(const BigNum& a, const BigNum& b);
  friend bool operator==(const BigNum& a, const BigNum& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

  const bignum_st* get() const { return bn_.get(); }

 private:
  struct Deleter {
    void operator()(bignum_st* bn) const;
  };
  explicit BigNum(bignum_st* owned);

  std::unique_ptr<bignum_st, Deleter> bn_;
};

// Uniform in [0, bound).
BigNum RandomBelow(const BigNum& bound, Rng& rng);
// Uniform in [1, m) and coprime to m.
BigNum RandomUnit(const BigNum& m, Rng& rng);
// Random prime of exactly `bits` bits with the top two bits set, so the
// product of two such primes has exactly 2*bits bits. `bits` >= 8.
absl::StatusOr<BigNum> GeneratePrime(int bits, Rng& rng);

}  // namespace carsec::crypto

#endif  // CARSEC_CRYPTO_BIG_NUM_H_
