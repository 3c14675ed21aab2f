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

#include "carsec/crypto/key_agreement.h"

#include <algorithm>

#include "absl/status/status.h"

namespace carsec::crypto {
namespace {

constexpr int kMaxRsaKeygenAttempts = 64;

Bytes ConfirmTag(const SymmetricKey& key) {
  MacTag tag = MacSign(key, ToBytes("kem-confirm"));
  return Bytes(tag.begin(), tag.begin() + kKemConfirmSize);
}

struct RsaPublic {
  BigNum n;
};

absl::StatusOr<RsaPublic> ParseRsaPublic(ByteSpan body) {
  if (body.size() < 2) return absl::InvalidArgumentError("short RSA key");
  size_t len = ReadUint(body, 0, 2);
  if (body.size() != 2 + len || len == 0) {
    return absl::InvalidArgumentError("bad RSA key length");
  }
  BigNum n = BigNum::FromBytes(body.subspan(2));
  if (n.BitLength() < 64 || !n.IsOdd()) {
    return absl::InvalidArgumentError("bad RSA modulus");
  }
  return RsaPublic{std::move(n)};
}

}  // namespace

DhShare DhKeygen(const EcGroup& group, Rng& rng) {
  BigNum a = group.RandomScalar(rng);
  EcPoint p = group.MulBase(a);
  return DhShare{std::move(a), std::move(p)};
}

absl::StatusOr<SymmetricKey> DhCombine(const BigNum& my_scalar,
                                       const EcPoint& their_point) {
  if (their_point.IsInfinity()) {
    return absl::InvalidArgumentError("peer share is the identity element");
  }
  EcPoint shared = their_point.Mul(my_scalar);
  if (shared.IsInfinity()) {
    return absl::InvalidArgumentError("degenerate shared point");
  }
  return SymmetricKey::Derive("dh-session", shared.Encode());
}

absl::StatusOr<KemKeyPair> KemKeyPair::GenerateRsa(int modulus_bits,
                                                   Rng& rng) {
  if (modulus_bits < 128 || modulus_bits % 2 != 0) {
    return absl::InvalidArgumentError("RSA modulus size must be even, >= 128");
  }
  const BigNum e(kRsaKemExponent);
  const BigNum one(1);
  for (int attempt = 0; attempt < kMaxRsaKeygenAttempts; ++attempt) {
    absl::StatusOr<BigNum> p = GeneratePrime(modulus_bits / 2, rng);
    if (!p.ok()) return p.status();
    absl::StatusOr<BigNum> q = GeneratePrime(modulus_bits / 2, rng);
    if (!q.ok()) return q.status();
    if (*p == *q) continue;
    BigNum phi = p->Sub(one).Mul(q->Sub(one));
    std::optional<BigNum> d = e.ModInverse(phi);
    if (!d.has_value()) continue;
    BigNum n = p->Mul(*q);
    Bytes pub{static_cast<uint8_t>(KemKind::kRsa)};
    Bytes nb = n.ToBytes();
    AppendUint(pub, nb.size(), 2);
    Append(pub, nb);
    return KemKeyPair(std::move(pub), RsaKemSecret{std::move(n), *d});
  }
  return absl::ResourceExhaustedError("RSA key generation failed");
}

KemKeyPair KemKeyPair::GenerateDh(Curve curve, Rng& rng) {
  const EcGroup& group = EcGroup::Get(curve);
  DhShare share = DhKeygen(group, rng);
  Bytes pub{static_cast<uint8_t>(KemKind::kDh), static_cast<uint8_t>(curve)};
  Append(pub, share.point.Encode());
  return KemKeyPair(std::move(pub), DhKemSecret{curve, share.scalar});
}

KemKind KemKeyPair::kind() const {
  return std::holds_alternative<RsaKemSecret>(secret_) ? KemKind::kRsa
                                                       : KemKind::kDh;
}

absl::StatusOr<Encapsulation> KemEncapsulate(ByteSpan public_key, Rng& rng) {
  if (public_key.empty()) return absl::InvalidArgumentError("empty KEM key");
  ByteSpan body = public_key.subspan(1);
  switch (public_key[0]) {
    case static_cast<uint8_t>(KemKind::kRsa): {
      absl::StatusOr<RsaPublic> pub = ParseRsaPublic(body);
      if (!pub.ok()) return pub.status();
      const size_t width = pub->n.ByteLength();
      BigNum x;
      do {
        x = RandomBelow(pub->n, rng);
      } while (x.BitLength() < 2);
      BigNum c = x.ModExp(BigNum(kRsaKemExponent), pub->n);
      SymmetricKey key = SymmetricKey::Derive("kem-rsa", x.ToBytes(width));
      Bytes ct = c.ToBytes(width);
      Append(ct, ConfirmTag(key));
      return Encapsulation{key, std::move(ct)};
    }
    case static_cast<uint8_t>(KemKind::kDh): {
      if (body.empty()) return absl::InvalidArgumentError("short DH key");
      absl::StatusOr<Curve> curve = CurveFromId(body[0]);
      if (!curve.ok()) return curve.status();
      const EcGroup& group = EcGroup::Get(*curve);
      absl::StatusOr<EcPoint> peer = group.Decode(body.subspan(1));
      if (!peer.ok()) return peer.status();
      DhShare mine = DhKeygen(group, rng);
      absl::StatusOr<SymmetricKey> key = DhCombine(mine.scalar, *peer);
      if (!key.ok()) return key.status();
      Bytes ct = mine.point.Encode();
      Append(ct, ConfirmTag(*key));
      return Encapsulation{*key, std::move(ct)};
    }
    default:
      return absl::InvalidArgumentError("unknown KEM kind");
  }
}

absl::StatusOr<SymmetricKey> KemDecapsulate(const KemKeyPair& key_pair,
                                            ByteSpan ciphertext) {
  if (ciphertext.size() <= kKemConfirmSize) {
    return absl::InvalidArgumentError("KEM ciphertext too short");
  }
  ByteSpan body = ciphertext.first(ciphertext.size() - kKemConfirmSize);
  ByteSpan confirm = ciphertext.last(kKemConfirmSize);

  absl::StatusOr<SymmetricKey> key = absl::InternalError("unset");
  if (const auto* rsa = std::get_if<RsaKemSecret>(&key_pair.secret())) {
    const size_t width = rsa->n.ByteLength();
    if (body.size() != width) {
      return absl::InvalidArgumentError("RSA-KEM ciphertext has wrong width");
    }
    BigNum c = BigNum::FromBytes(body);
    if (c >= rsa->n) {
      return absl::InvalidArgumentError("RSA-KEM ciphertext out of range");
    }
    BigNum x = c.ModExp(rsa->d, rsa->n);
    key = SymmetricKey::Derive("kem-rsa", x.ToBytes(width));
  } else {
    const auto& dh = std::get<DhKemSecret>(key_pair.secret());
    absl::StatusOr<EcPoint> peer = EcGroup::Get(dh.curve).Decode(body);
    if (!peer.ok()) return peer.status();
    key = DhCombine(dh.scalar, *peer);
    if (!key.ok()) return key.status();
  }
  if (!ConstantTimeEquals(ConfirmTag(*key), confirm)) {
    return absl::DataLossError("KEM decapsulation failed key confirmation");
  }
  return key;
}

}  // namespace carsec::crypto
