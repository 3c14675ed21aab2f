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

#include "carsec/crypto/big_num.h"

#include <openssl/bn.h>
#include <openssl/crypto.h>

#include <cstdlib>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace carsec::crypto {
namespace {

// Scratch space only; holds no values between calls.
BN_CTX* Scratch() {
  thread_local std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> ctx(
      BN_CTX_new(), &BN_CTX_free);
  return ctx.get();
}

void Check(int ok) {
  if (ok != 1) std::abort();
}

constexpr int kMaxPrimeAttempts = 20000;

}  // namespace

void BigNum::Deleter::operator()(bignum_st* bn) const { BN_clear_free(bn); }

BigNum::BigNum() : bn_(BN_new()) {}

BigNum::BigNum(uint64_t value) : bn_(BN_new()) {
  Check(BN_set_word(bn_.get(), value));
}

BigNum::BigNum(bignum_st* owned) : bn_(owned) {}

BigNum::BigNum(const BigNum& other) : bn_(BN_dup(other.bn_.get())) {}

BigNum::BigNum(BigNum&& other) noexcept : bn_(std::move(other.bn_)) {
  other.bn_.reset(BN_new());
}

BigNum& BigNum::operator=(const BigNum& other) {
  if (this != &other) bn_.reset(BN_dup(other.bn_.get()));
  return *this;
}

BigNum& BigNum::operator=(BigNum&& other) noexcept {
  if (this != &other) {
    bn_ = std::move(other.bn_);
    other.bn_.reset(BN_new());
  }
  return *this;
}

BigNum::~BigNum() = default;

BigNum BigNum::FromBytes(ByteSpan bytes) {
  return BigNum(
      BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
}

absl::StatusOr<BigNum> BigNum::FromDecimal(const std::string& decimal) {
  if (decimal.empty() ||
      decimal.find_first_not_of("0123456789") != std::string::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("not a decimal integer: '", decimal, "'"));
  }
  BIGNUM* bn = nullptr;
  if (BN_dec2bn(&bn, decimal.c_str()) == 0) {
    return absl::InvalidArgumentError("decimal parse failure");
  }
  return BigNum(bn);
}

Bytes BigNum::ToBytes() const {
  Bytes out(BN_num_bytes(bn_.get()));
  BN_bn2bin(bn_.get(), out.data());
  return out;
}

Bytes BigNum::ToBytes(size_t width) const {
  Bytes out(width);
  if (BN_bn2binpad(bn_.get(), out.data(), static_cast<int>(width)) < 0) {
    std::abort();
  }
  return out;
}

std::string BigNum::ToDecimal() const {
  char* s = BN_bn2dec(bn_.get());
  std::string out(s);
  OPENSSL_free(s);
  return out;
}

absl::StatusOr<uint64_t> BigNum::ToU64() const {
  if (BitLength() > 64) return absl::OutOfRangeError("value exceeds 64 bits");
  return ReadUint(ToBytes(8), 0, 8);
}

int BigNum::BitLength() const { return BN_num_bits(bn_.get()); }
bool BigNum::IsZero() const { return BN_is_zero(bn_.get()); }
bool BigNum::IsOne() const { return BN_is_one(bn_.get()); }
bool BigNum::IsOdd() const { return BN_is_odd(bn_.get()); }

BigNum BigNum::Add(const BigNum& other) const {
  BigNum r;
  Check(BN_add(r.bn_.get(), bn_.get(), other.bn_.get()));
  return r;
}

BigNum BigNum::Sub(const BigNum& other) const {
  BigNum r;
  Check(BN_sub(r.bn_.get(), bn_.get(), other.bn_.get()));
  if (BN_is_negative(r.bn_.get())) std::abort();
  return r;
}

BigNum BigNum::Mul(const BigNum& other) const {
  BigNum r;
  Check(BN_mul(r.bn_.get(), bn_.get(), other.bn_.get(), Scratch()));
  return r;
}

BigNum BigNum::Mod(const BigNum& m) const {
  BigNum r;
  Check(BN_nnmod(r.bn_.get(), bn_.get(), m.bn_.get(), Scratch()));
  return r;
}

BigNum BigNum::Div(const BigNum& d) const {
  BigNum r;
  Check(BN_div(r.bn_.get(), nullptr, bn_.get(), d.bn_.get(), Scratch()));
  return r;
}

BigNum BigNum::ModAdd(const BigNum& other, const BigNum& m) const {
  BigNum r;
  Check(BN_mod_add(r.bn_.get(), bn_.get(), other.bn_.get(), m.bn_.get(),
                   Scratch()));
  return r;
}

BigNum BigNum::ModSub(const BigNum& other, const BigNum& m) const {
  BigNum r;
  Check(BN_mod_sub(r.bn_.get(), bn_.get(), other.bn_.get(), m.bn_.get(),
                   Scratch()));
  return r;
}

BigNum BigNum::ModMul(const BigNum& other, const BigNum& m) const {
  BigNum r;
  Check(BN_mod_mul(r.bn_.get(), bn_.get(), other.bn_.get(), m.bn_.get(),
                   Scratch()));
  return r;
}

BigNum BigNum::ModExp(const BigNum& exponent, const BigNum& m) const {
  BigNum r;
  if (m.IsOne()) return r;
  Check(BN_mod_exp(r.bn_.get(), bn_.get(), exponent.bn_.get(), m.bn_.get(),
                   Scratch()));
  return r;
}

std::optional<BigNum> BigNum::ModInverse(const BigNum& m) const {
  BIGNUM* inv = BN_mod_inverse(nullptr, bn_.get(), m.bn_.get(), Scratch());
  if (inv == nullptr) return std::nullopt;
  return BigNum(inv);
}

BigNum BigNum::Gcd(const BigNum& other) const {
  BigNum r;
  Check(BN_gcd(r.bn_.get(), bn_.get(), other.bn_.get(), Scratch()));
  return r;
}

bool BigNum::IsPrime() const {
  return BN_check_prime(bn_.get(), Scratch(), nullptr) == 1;
}

std::strong_ordering operator<=>(const BigNum& a, const BigNum& b) {
  int c = BN_cmp(a.bn_.get(), b.bn_.get());
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

BigNum RandomBelow(const BigNum& bound, Rng& rng) {
  int bits = bound.BitLength();
  size_t bytes = (bits + 7) / 8;
  int excess = static_cast<int>(bytes * 8) - bits;
  for (;;) {
    Bytes buf = rng.Generate(bytes);
    if (!buf.empty()) buf[0] &= static_cast<uint8_t>(0xff >> excess);
    BigNum candidate = BigNum::FromBytes(buf);
    if (candidate < bound) return candidate;
  }
}

BigNum RandomUnit(const BigNum& m, Rng& rng) {
  for (;;) {
    BigNum r = RandomBelow(m, rng);
    if (!r.IsZero() && r.Gcd(m).IsOne()) return r;
  }
}

absl::StatusOr<BigNum> GeneratePrime(int bits, Rng& rng) {
  if (bits < 8) return absl::InvalidArgumentError("prime size below 8 bits");
  size_t bytes = (bits + 7) / 8;
  int excess = static_cast<int>(bytes * 8) - bits;
  for (int attempt = 0; attempt < kMaxPrimeAttempts; ++attempt) {
    Bytes buf = rng.Generate(bytes);
    buf[0] &= static_cast<uint8_t>(0xff >> excess);
    // Top two bits.
    buf[0] |= static_cast<uint8_t>(0x80 >> excess);
    if (bits % 8 == 1) {
      buf[1] |= 0x80;
    } else {
      buf[0] |= static_cast<uint8_t>(0x40 >> excess);
    }
    buf.back() |= 1;
    BigNum candidate = BigNum::FromBytes(buf);
    if (candidate.IsPrime()) return candidate;
  }
  return absl::ResourceExhaustedError(
      absl::StrCat("no ", bits, "-bit prime after ", kMaxPrimeAttempts,
                   " candidates"));
}

}  // namespace carsec::crypto
