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

#include "carsec/crypto/ec.h"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <cstdlib>

#include "absl/status/status.h"
#include "carsec/crypto/symmetric.h"

namespace carsec::crypto {
namespace {

void Check(int ok) {
  if (ok != 1) std::abort();
}

int NidFor(Curve curve) {
  switch (curve) {
    case Curve::kP192:
      return NID_X9_62_prime192v1;
    case Curve::kP256:
      return NID_X9_62_prime256v1;
  }
  std::abort();
}

}  // namespace

absl::StatusOr<Curve> CurveFromId(uint8_t id) {
  switch (id) {
    case static_cast<uint8_t>(Curve::kP192):
      return Curve::kP192;
    case static_cast<uint8_t>(Curve::kP256):
      return Curve::kP256;
    default:
      return absl::InvalidArgumentError("unknown curve id");
  }
}

EcGroup::EcGroup(Curve curve)
    : curve_(curve),
      group_(EC_GROUP_new_by_curve_name(NidFor(curve)), &EC_GROUP_free) {
  BIGNUM* order = BN_new();
  Check(EC_GROUP_get_order(group_.get(), order, nullptr));
  Bytes buf(BN_num_bytes(order));
  BN_bn2bin(order, buf.data());
  order_ = BigNum::FromBytes(buf);
  BN_free(order);
  point_size_ = 1 + (EC_GROUP_get_degree(group_.get()) + 7) / 8;
}

const EcGroup& EcGroup::Get(Curve curve) {
  static const EcGroup* p192 = new EcGroup(Curve::kP192);
  static const EcGroup* p256 = new EcGroup(Curve::kP256);
  return curve == Curve::kP192 ? *p192 : *p256;
}

EcPoint EcGroup::Generator() const {
  return EcPoint(this, EC_POINT_dup(EC_GROUP_get0_generator(group_.get()),
                                    group_.get()));
}

EcPoint EcGroup::Infinity() const {
  EC_POINT* p = EC_POINT_new(group_.get());
  Check(EC_POINT_set_to_infinity(group_.get(), p));
  return EcPoint(this, p);
}

BigNum EcGroup::RandomScalar(Rng& rng) const {
  for (;;) {
    BigNum s = RandomBelow(order_, rng);
    if (!s.IsZero()) return s;
  }
}

EcPoint EcGroup::MulBase(const BigNum& scalar) const {
  EC_POINT* p = EC_POINT_new(group_.get());
  Check(EC_POINT_mul(group_.get(), p, scalar.get(), nullptr, nullptr,
                     nullptr));
  return EcPoint(this, p);
}

absl::StatusOr<EcPoint> EcGroup::Decode(ByteSpan encoded) const {
  if (encoded.size() != point_size_) {
    return absl::InvalidArgumentError("point encoding has wrong length");
  }
  EC_POINT* p = EC_POINT_new(group_.get());
  if (EC_POINT_oct2point(group_.get(), p, encoded.data(), encoded.size(),
                         nullptr) != 1) {
    EC_POINT_free(p);
    return absl::InvalidArgumentError("point is not on the curve");
  }
  EcPoint point(this, p);
  if (point.IsInfinity()) {
    return absl::InvalidArgumentError("point at infinity");
  }
  return point;
}

void EcPoint::Deleter::operator()(ec_point_st* p) const { EC_POINT_free(p); }

EcPoint::EcPoint(const EcGroup* group, ec_point_st* owned)
    : group_(group), point_(owned) {}

EcPoint::EcPoint(const EcPoint& other)
    : group_(other.group_),
      point_(EC_POINT_dup(other.point_.get(), other.group_->get())) {}

EcPoint::EcPoint(EcPoint&& other) noexcept
    : group_(other.group_), point_(std::move(other.point_)) {
  other.point_.reset(EC_POINT_new(group_->get()));
}

EcPoint& EcPoint::operator=(const EcPoint& other) {
  if (this != &other) {
    group_ = other.group_;
    point_.reset(EC_POINT_dup(other.point_.get(), group_->get()));
  }
  return *this;
}

EcPoint& EcPoint::operator=(EcPoint&& other) noexcept {
  if (this != &other) {
    group_ = other.group_;
    point_ = std::move(other.point_);
    other.point_.reset(EC_POINT_new(group_->get()));
  }
  return *this;
}

EcPoint::~EcPoint() = default;

EcPoint EcPoint::Mul(const BigNum& scalar) const {
  EC_POINT* p = EC_POINT_new(group_->get());
  Check(EC_POINT_mul(group_->get(), p, nullptr, point_.get(), scalar.get(),
                     nullptr));
  return EcPoint(group_, p);
}

EcPoint EcPoint::Add(const EcPoint& other) const {
  EC_POINT* p = EC_POINT_new(group_->get());
  Check(EC_POINT_add(group_->get(), p, point_.get(), other.point_.get(),
                     nullptr));
  return EcPoint(group_, p);
}

EcPoint EcPoint::Negate() const {
  EcPoint r(*this);
  Check(EC_POINT_invert(group_->get(), r.point_.get(), nullptr));
  return r;
}

EcPoint EcPoint::Sub(const EcPoint& other) const {
  return Add(other.Negate());
}

bool EcPoint::IsInfinity() const {
  return EC_POINT_is_at_infinity(group_->get(), point_.get()) == 1;
}

Bytes EcPoint::Encode() const {
  if (IsInfinity()) return Bytes{0};
  Bytes out(group_->point_size());
  size_t n = EC_POINT_point2oct(group_->get(), point_.get(),
                                POINT_CONVERSION_COMPRESSED, out.data(),
                                out.size(), nullptr);
  if (n != out.size()) std::abort();
  return out;
}

bool operator==(const EcPoint& a, const EcPoint& b) {
  if (a.group_->curve() != b.group_->curve()) return false;
  return EC_POINT_cmp(a.group_->get(), a.point_.get(), b.point_.get(),
                      nullptr) == 0;
}

BigNum HashToScalar(const EcGroup& group, ByteSpan data) {
  // 512 bits of hash output reduced mod the order keeps the bias negligible.
  Digest lo = Hash({ToBytes("scalar-0"), data});
  Digest hi = Hash({ToBytes("scalar-1"), data});
  Bytes wide(hi.begin(), hi.end());
  Append(wide, lo);
  return BigNum::FromBytes(wide).Mod(group.order());
}

}  // namespace carsec::crypto
