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

#ifndef CARSEC_CRYPTO_EC_H_
#define CARSEC_CRYPTO_EC_H_

#include <cstdint>
#include <memory>

#include "absl/status/statusor.h"
#include "carsec/crypto/big_num.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"

struct ec_group_st;
struct ec_point_st;

namespace carsec::crypto {

enum class Curve : uint8_t {
  kP192 = 1,
  kP256 = 2,
};

absl::StatusOr<Curve> CurveFromId(uint8_t id);

class EcPoint;

// Prime-order NIST curve. One immutable instance per curve; points keep a
// pointer to it.
class EcGroup {
 public:
  static const EcGroup& Get(Curve curve);

  EcGroup(const EcGroup&) = delete;
  EcGroup& operator=(const EcGroup&) = delete;

  Curve curve() const { return curve_; }
  const BigNum& order() const { return order_; }
  // Length of a compressed point encoding.
  size_t point_size() const { return point_size_; }
  size_t scalar_size() const { return order_.ByteLength(); }

  EcPoint Generator() const;
  EcPoint Infinity() const;
  // Scalar uniform in [1, order).
  BigNum RandomScalar(Rng& rng) const;
  // Multiplies the generator.
  EcPoint MulBase(const BigNum& scalar) const;
  // Rejects off-curve data and the point at infinity.
  absl::StatusOr<EcPoint> Decode(ByteSpan encoded) const;

  const ec_group_st* get() const { return group_.get(); }

 private:
  explicit EcGroup(Curve curve);

  Curve curve_;
  std::shared_ptr<ec_group_st> group_;
  BigNum order_;
  size_t point_size_;
};

class EcPoint {
 public:
  EcPoint(const EcPoint& other);
  EcPoint(EcPoint&& other) noexcept;
  EcPoint& operator=(const EcPoint& other);
  EcPoint& operator=(EcPoint&& other) noexcept;
  ~EcPoint();

  EcPoint Mul(const BigNum& scalar) const;
  EcPoint Add(const EcPoint& other) const;
  EcPoint Sub(const EcPoint& other) const;
  EcPoint Negate() const;
  bool IsInfinity() const;
  // Compressed SEC1 encoding. The point at infinity encodes as a single
  // zero byte.
  Bytes Encode() const;

  const EcGroup& group() const { return *group_; }

  friend bool operator==(const EcPoint& a, const EcPoint& b);

 private:
  friend class EcGroup;
  struct Deleter {
    void operator()(ec_point_st* p) const;
  };
  EcPoint(const EcGroup* group, ec_point_st* owned);

  const EcGroup* group_;
  std::unique_ptr<ec_point_st, Deleter> point_;
};

// Hash of arbitrary data to a scalar mod `group.order()`.
BigNum HashToScalar(const EcGroup& group, ByteSpan data);

}  // namespace carsec::crypto

#endif  // CARSEC_CRYPTO_EC_H_
