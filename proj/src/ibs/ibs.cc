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

#include "carsec/ibs/ibs.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "carsec/crypto/symmetric.h"
#include "carsec/wire/tlv.h"

namespace carsec::ibs {
namespace {

using crypto::Rng;

constexpr int kMaxSetupAttempts = 64;
constexpr int kMaxIdentityCounter = 256;

// Key file record tags.
enum : uint8_t {
  kTagScheme = 1,
  kTagModulus = 2,
  kTagExponent = 3,
  kTagSecretExponent = 4,
  kTagIdentity = 5,
  kTagIdentityElement = 6,
  kTagUserSecret = 7,
};

BigNum HashToModulus(const BigNum& n, ByteSpan data) {
  crypto::Digest d = crypto::Hash(data);
  return BigNum::FromBytes(d).Mod(n);
}

bool InUnitRange(const BigNum& x, const BigNum& n) {
  return !x.IsZero() && x < n;
}

// Draws a replacement exponent in [3, bound) coprime to phi.
BigNum ResampleExponent(const BigNum& bound, const BigNum& phi, Rng& rng) {
  for (;;) {
    BigNum e = crypto::RandomBelow(bound, rng);
    if (e < BigNum(3)) continue;
    if (e.Gcd(phi).IsOne()) return e;
  }
}

absl::StatusOr<MasterKey> MasterFromPrimes(Scheme scheme, const BigNum& p,
                                           const BigNum& q,
                                           std::optional<BigNum> exponent,
                                           Rng& rng) {
  if (p == q) return absl::InvalidArgumentError("p and q must differ");
  const BigNum one(1);
  BigNum n = p.Mul(q);
  BigNum phi = p.Sub(one).Mul(q.Sub(one));
  if (phi <= BigNum(3)) {
    return absl::InvalidArgumentError("primes too small");
  }
  BigNum e;
  if (exponent.has_value()) {
    e = *exponent;
  } else if (scheme == Scheme::kShamir) {
    e = BigNum(kDefaultShamirExponent);
  } else {
    // GQ draws v from Z_n.
    e = ResampleExponent(n, phi, rng);
  }
  if (e < BigNum(2) || !e.Gcd(phi).IsOne()) {
    e = ResampleExponent(scheme == Scheme::kShamir ? phi : n, phi, rng);
  }
  std::optional<BigNum> d = e.ModInverse(phi);
  if (!d.has_value()) return absl::InternalError("exponent not invertible");
  return MasterKey{PublicParams{scheme, std::move(n), std::move(e)}, *d};
}

}  // namespace

std::string SchemeName(Scheme scheme) {
  return scheme == Scheme::kShamir ? "shamir" : "gq";
}

absl::StatusOr<Scheme> ParseScheme(const std::string& name) {
  if (name == "shamir") return Scheme::kShamir;
  if (name == "gq") return Scheme::kGq;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown IBS scheme '", name, "'"));
}

absl::StatusOr<MasterKey> Setup(const SetupOptions& options, Rng& rng) {
  if (options.modulus_bits < 512 || options.modulus_bits % 2 != 0) {
    return absl::InvalidArgumentError(
        "modulus size must be even and at least 512 bits");
  }
  for (int attempt = 0; attempt < kMaxSetupAttempts; ++attempt) {
    absl::StatusOr<BigNum> p =
        crypto::GeneratePrime(options.modulus_bits / 2, rng);
    if (!p.ok()) return p.status();
    absl::StatusOr<BigNum> q =
        crypto::GeneratePrime(options.modulus_bits / 2, rng);
    if (!q.ok()) return q.status();
    if (*p == *q) continue;
    return MasterFromPrimes(options.scheme, *p, *q, options.exponent, rng);
  }
  return absl::ResourceExhaustedError("IBS setup failed to find primes");
}

absl::StatusOr<MasterKey> SetupFromPrimes(Scheme scheme, const BigNum& p,
                                          const BigNum& q,
                                          const BigNum& exponent, Rng& rng) {
  if (!p.IsPrime() || !q.IsPrime()) {
    return absl::InvalidArgumentError("p and q must be prime");
  }
  return MasterFromPrimes(scheme, p, q, exponent, rng);
}

absl::StatusOr<BigNum> IdentityElement(const BigNum& n, ByteSpan identity) {
  Bytes input(identity.begin(), identity.end());
  BigNum x = HashToModulus(n, input);
  for (int counter = 1; counter <= kMaxIdentityCounter; ++counter) {
    if (!x.IsZero() && x.Gcd(n).IsOne()) return x;
    input.assign(identity.begin(), identity.end());
    input.push_back(static_cast<uint8_t>(counter - 1));
    x = HashToModulus(n, input);
  }
  return absl::FailedPreconditionError(
      "identity does not map to a unit modulo n");
}

absl::StatusOr<UserKey> KeyDerForElement(const MasterKey& msk,
                                         ByteSpan identity,
                                         const BigNum& element) {
  const BigNum& n = msk.params.n;
  if (!InUnitRange(element, n) || !element.Gcd(n).IsOne()) {
    return absl::InvalidArgumentError("identity element is not a unit");
  }
  BigNum secret;
  if (msk.params.scheme == Scheme::kShamir) {
    secret = element.ModExp(msk.secret_exponent, n);
  } else {
    std::optional<BigNum> j_inv = element.ModInverse(n);
    if (!j_inv.has_value()) return absl::InternalError("J not invertible");
    secret = j_inv->ModExp(msk.secret_exponent, n);
  }
  return UserKey{msk.params, Bytes(identity.begin(), identity.end()), element,
                 std::move(secret)};
}

absl::StatusOr<UserKey> KeyDer(const MasterKey& msk, ByteSpan identity) {
  absl::StatusOr<BigNum> element = IdentityElement(msk.params.n, identity);
  if (!element.ok()) return element.status();
  return KeyDerForElement(msk, identity, *element);
}

BigNum MessageExponent(const PublicParams& params, const BigNum& t,
                       ByteSpan msg) {
  if (params.scheme == Scheme::kShamir) {
    Bytes input = t.ToBytes(params.width());
    Append(input, msg);
    return HashToModulus(params.n, input);
  }
  return HashToModulus(params.n, msg);
}

Signature SignWithCommitment(const UserKey& key, ByteSpan msg,
                             const BigNum& r) {
  const PublicParams& pp = key.params;
  const BigNum& n = pp.n;
  if (pp.scheme == Scheme::kShamir) {
    BigNum t = r.ModExp(pp.exponent, n);
    BigNum c = MessageExponent(pp, t, msg);
    BigNum s = key.secret.ModMul(r.ModExp(c, n), n);
    return Signature{std::move(s), std::move(t)};
  }
  BigNum commitment = r.ModExp(pp.exponent, n);
  BigNum c = MessageExponent(pp, BigNum(), msg);
  BigNum d = key.identity_element.ModExp(c, n).ModMul(
      commitment.ModExp(pp.exponent, n), n);
  BigNum t = r.ModMul(key.secret.ModExp(d, n), n);
  return Signature{std::move(d), std::move(t)};
}

Signature Sign(const UserKey& key, ByteSpan msg, Rng& rng) {
  return SignWithCommitment(key, msg, crypto::RandomUnit(key.params.n, rng));
}

bool VerifyForElement(const PublicParams& params, const BigNum& element,
                      ByteSpan msg, const Signature& sig) {
  const BigNum& n = params.n;
  if (!InUnitRange(sig.first, n) || !InUnitRange(sig.second, n)) {
    return false;
  }
  if (params.scheme == Scheme::kShamir) {
    const BigNum& s = sig.first;
    const BigNum& t = sig.second;
    BigNum c = MessageExponent(params, t, msg);
    BigNum lhs = s.ModExp(params.exponent, n);
    BigNum rhs = element.ModMul(t.ModExp(c, n), n);
    return lhs == rhs;
  }
  BigNum recomputed = gq::RecomputeCommitment(params, element, sig);
  BigNum c = MessageExponent(params, BigNum(), msg);
  BigNum d_prime = element.ModExp(c, n).ModMul(
      recomputed.ModExp(params.exponent, n), n);
  return d_prime == sig.first;
}

bool Verify(const PublicParams& params, ByteSpan identity, ByteSpan msg,
            const Signature& sig) {
  absl::StatusOr<BigNum> element = IdentityElement(params.n, identity);
  if (!element.ok()) return false;
  return VerifyForElement(params, *element, msg, sig);
}

bool VerifyEncoded(const PublicParams& params, ByteSpan identity,
                   ByteSpan msg, ByteSpan encoded) {
  absl::StatusOr<Signature> sig = DecodeSignature(params, encoded);
  if (!sig.ok()) return false;
  return Verify(params, identity, msg, *sig);
}

Bytes EncodeSignature(const PublicParams& params, const Signature& sig) {
  Bytes out = sig.first.ToBytes(params.width());
  Append(out, sig.second.ToBytes(params.width()));
  return out;
}

absl::StatusOr<Signature> DecodeSignature(const PublicParams& params,
                                          ByteSpan encoded) {
  const size_t w = params.width();
  if (encoded.size() != 2 * w) {
    return absl::InvalidArgumentError(
        absl::StrCat("signature must be ", 2 * w, " bytes, got ",
                     encoded.size()));
  }
  return Signature{BigNum::FromBytes(encoded.first(w)),
                   BigNum::FromBytes(encoded.subspan(w))};
}

TruncatedSignature Truncate64(ByteSpan encoded) {
  TruncatedSignature out{};
  size_t take = std::min(encoded.size(), kTruncatedSize);
  std::copy(encoded.end() - take, encoded.end(), out.end() - take);
  return out;
}

namespace gq {

BigNum RecomputeCommitment(const PublicParams& params, const BigNum& j,
                           const Signature& sig) {
  const BigNum& n = params.n;
  return j.ModExp(sig.first, n).ModMul(sig.second.ModExp(params.exponent, n),
                                       n);
}

BigNum ClosingValue(const PublicParams& params, const BigNum& j,
                    const BigNum& c, const Signature& sig) {
  const BigNum& n = params.n;
  const BigNum& v = params.exponent;
  BigNum j_exp = c.Add(sig.first.Mul(v));
  return j.ModExp(j_exp, n).ModMul(sig.second.ModExp(v.Mul(v), n), n);
}

}  // namespace gq

Bytes EncodePublicParams(const PublicParams& params) {
  wire::TlvWriter w;
  w.Add(kTagScheme, Bytes{static_cast<uint8_t>(params.scheme)})
      .Add(kTagModulus, params.n.ToBytes())
      .Add(kTagExponent, params.exponent.ToBytes());
  return wire::WrapKeyFile(wire::KeyFileKind::kIbsParams, w.bytes());
}

namespace {

absl::StatusOr<PublicParams> ReadParams(const wire::TlvReader& r) {
  absl::StatusOr<Bytes> scheme = r.Get(kTagScheme);
  absl::StatusOr<Bytes> n = r.Get(kTagModulus);
  absl::StatusOr<Bytes> e = r.Get(kTagExponent);
  if (!scheme.ok()) return scheme.status();
  if (!n.ok()) return n.status();
  if (!e.ok()) return e.status();
  if (scheme->size() != 1 ||
      ((*scheme)[0] != static_cast<uint8_t>(Scheme::kShamir) &&
       (*scheme)[0] != static_cast<uint8_t>(Scheme::kGq))) {
    return absl::InvalidArgumentError("unknown IBS scheme tag");
  }
  PublicParams pp{static_cast<Scheme>((*scheme)[0]), BigNum::FromBytes(*n),
                  BigNum::FromBytes(*e)};
  if (pp.n.BitLength() < 4 || !pp.n.IsOdd() || pp.exponent < BigNum(2)) {
    return absl::InvalidArgumentError("malformed IBS parameters");
  }
  return pp;
}

}  // namespace

absl::StatusOr<PublicParams> DecodePublicParams(ByteSpan file) {
  absl::StatusOr<wire::TlvReader> r =
      wire::OpenKeyFile(file, wire::KeyFileKind::kIbsParams);
  if (!r.ok()) return r.status();
  return ReadParams(*r);
}

Bytes EncodeMasterKey(const MasterKey& key) {
  wire::TlvWriter w;
  w.Add(kTagScheme, Bytes{static_cast<uint8_t>(key.params.scheme)})
      .Add(kTagModulus, key.params.n.ToBytes())
      .Add(kTagExponent, key.params.exponent.ToBytes())
      .Add(kTagSecretExponent, key.secret_exponent.ToBytes());
  return wire::WrapKeyFile(wire::KeyFileKind::kIbsMaster, w.bytes());
}

absl::StatusOr<MasterKey> DecodeMasterKey(ByteSpan file) {
  absl::StatusOr<wire::TlvReader> r =
      wire::OpenKeyFile(file, wire::KeyFileKind::kIbsMaster);
  if (!r.ok()) return r.status();
  absl::StatusOr<PublicParams> pp = ReadParams(*r);
  if (!pp.ok()) return pp.status();
  absl::StatusOr<Bytes> d = r->Get(kTagSecretExponent);
  if (!d.ok()) return d.status();
  return MasterKey{*std::move(pp), BigNum::FromBytes(*d)};
}

Bytes EncodeUserKey(const UserKey& key) {
  wire::TlvWriter w;
  w.Add(kTagScheme, Bytes{static_cast<uint8_t>(key.params.scheme)})
      .Add(kTagModulus, key.params.n.ToBytes())
      .Add(kTagExponent, key.params.exponent.ToBytes())
      .Add(kTagIdentity, key.identity)
      .Add(kTagIdentityElement, key.identity_element.ToBytes())
      .Add(kTagUserSecret, key.secret.ToBytes());
  return wire::WrapKeyFile(wire::KeyFileKind::kIbsUser, w.bytes());
}

absl::StatusOr<UserKey> DecodeUserKey(ByteSpan file) {
  absl::StatusOr<wire::TlvReader> r =
      wire::OpenKeyFile(file, wire::KeyFileKind::kIbsUser);
  if (!r.ok()) return r.status();
  absl::StatusOr<PublicParams> pp = ReadParams(*r);
  if (!pp.ok()) return pp.status();
  absl::StatusOr<Bytes> id = r->Get(kTagIdentity);
  absl::StatusOr<Bytes> j = r->Get(kTagIdentityElement);
  absl::StatusOr<Bytes> s = r->Get(kTagUserSecret);
  if (!id.ok()) return id.status();
  if (!j.ok()) return j.status();
  if (!s.ok()) return s.status();
  return UserKey{*std::move(pp), *id, BigNum::FromBytes(*j),
                 BigNum::FromBytes(*s)};
}

}  // namespace carsec::ibs
