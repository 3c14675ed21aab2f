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

#include "carsec/groupsig/groupsig.h"

#include <optional>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "carsec/crypto/big_num.h"
#include "carsec/crypto/ec.h"
#include "carsec/crypto/symmetric.h"
#include "carsec/wire/tlv.h"

namespace carsec::groupsig {
namespace {

using crypto::BigNum;
using crypto::EcGroup;
using crypto::EcPoint;
using crypto::Rng;

constexpr size_t kGroupIdSize = 16;
constexpr size_t kPointSize = 33;
constexpr size_t kScalarSize = 32;
constexpr size_t kSchnorrSize = 2 * kScalarSize;
constexpr size_t kIndexSize = 4;
// index || certificate, sealed.
constexpr size_t kEscrowSize =
    crypto::kAeadOverhead + kIndexSize + kSchnorrSize;
constexpr size_t kReferenceSigSize = kPointSize + kEscrowSize + kSchnorrSize;
constexpr size_t kRingBranchSize = 3 * kScalarSize;

enum : uint8_t { kTagBackend = 1, kTagSize = 2, kTagIndex = 3, kTagBody = 4 };

const EcGroup& Curve() { return EcGroup::Get(crypto::Curve::kP256); }

Bytes Scalar(const BigNum& x) { return x.ToBytes(kScalarSize); }

// Sequential reader over fixed-layout material.
class Cursor {
 public:
  explicit Cursor(ByteSpan data) : data_(data) {}

  std::optional<ByteSpan> Take(size_t n) {
    if (data_.size() - pos_ < n) return std::nullopt;
    ByteSpan out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::optional<EcPoint> Point() {
    std::optional<ByteSpan> b = Take(kPointSize);
    if (!b) return std::nullopt;
    absl::StatusOr<EcPoint> p = Curve().Decode(*b);
    if (!p.ok()) return std::nullopt;
    return *std::move(p);
  }
  // Rejects values not below the group order.
  std::optional<BigNum> ScalarValue() {
    std::optional<ByteSpan> b = Take(kScalarSize);
    if (!b) return std::nullopt;
    BigNum x = BigNum::FromBytes(*b);
    if (x >= Curve().order()) return std::nullopt;
    return x;
  }
  bool Done() const { return pos_ == data_.size(); }

 private:
  ByteSpan data_;
  size_t pos_ = 0;
};

// Schnorr signature (e, s) with e = H(W || P || msg), s = w + e x.
Bytes SchnorrSign(const BigNum& secret, const EcPoint& pub, ByteSpan msg,
                  Rng& rng) {
  const EcGroup& g = Curve();
  BigNum w = g.RandomScalar(rng);
  Bytes input = g.MulBase(w).Encode();
  Append(input, pub.Encode());
  Append(input, msg);
  BigNum e = crypto::HashToScalar(g, input);
  BigNum s = w.ModAdd(e.ModMul(secret, g.order()), g.order());
  Bytes out = Scalar(e);
  Append(out, Scalar(s));
  return out;
}

bool SchnorrVerify(const EcPoint& pub, ByteSpan msg, ByteSpan sig) {
  if (sig.size() != kSchnorrSize) return false;
  Cursor c(sig);
  std::optional<BigNum> e = c.ScalarValue();
  std::optional<BigNum> s = c.ScalarValue();
  if (!e || !s) return false;
  const EcGroup& g = Curve();
  EcPoint w = g.MulBase(*s).Sub(pub.Mul(*e));
  if (w.IsInfinity()) return false;
  Bytes input = w.Encode();
  Append(input, pub.Encode());
  Append(input, msg);
  return crypto::HashToScalar(g, input) == *e;
}

Bytes CertificateMessage(ByteSpan gid, uint32_t index) {
  Bytes m = ToBytes("gs-cert");
  Append(m, gid);
  AppendUint(m, index, kIndexSize);
  return m;
}

crypto::SymmetricKey EscrowKey(const EcPoint& shared) {
  return crypto::SymmetricKey::Derive("gs-escrow", shared.Encode());
}

// --- Reference backend -----------------------------------------------------

struct RefPublic {
  Bytes gid;
  EcPoint z, y, c;
};

std::optional<RefPublic> ParseRefPublic(const GroupPublicKey& gpk) {
  Cursor cur(gpk.material);
  std::optional<ByteSpan> gid = cur.Take(kGroupIdSize);
  std::optional<EcPoint> z = cur.Point();
  std::optional<EcPoint> y = cur.Point();
  std::optional<EcPoint> c = cur.Point();
  if (!gid || !z || !y || !c || !cur.Done()) return std::nullopt;
  return RefPublic{Bytes(gid->begin(), gid->end()), *z, *y, *c};
}

Bytes RefSignedData(ByteSpan gid, ByteSpan r, ByteSpan escrow,
                    ByteSpan msg) {
  Bytes data = ToBytes("gs-ref");
  Append(data, gid);
  Append(data, r);
  Append(data, escrow);
  Append(data, msg);
  return data;
}

Group RefGenerate(uint32_t n, Rng& rng) {
  const EcGroup& g = Curve();
  Bytes gid = rng.Generate(kGroupIdSize);
  BigNum z = g.RandomScalar(rng);
  BigNum y = g.RandomScalar(rng);
  BigNum c = g.RandomScalar(rng);
  EcPoint c_pub = g.MulBase(c);

  Group out;
  out.gpk = {Backend::kReference, n, gid};
  Append(out.gpk.material, g.MulBase(z).Encode());
  Append(out.gpk.material, g.MulBase(y).Encode());
  Append(out.gpk.material, c_pub.Encode());

  out.gmsk = {Backend::kReference, gid};
  Append(out.gmsk.material, Scalar(y));
  Append(out.gmsk.material, Scalar(c));

  for (uint32_t i = 1; i <= n; ++i) {
    GroupMemberKey m{Backend::kReference, i, gid};
    Append(m.material, Scalar(z));
    Append(m.material, SchnorrSign(c, c_pub, CertificateMessage(gid, i), rng));
    out.members.push_back(std::move(m));
  }
  return out;
}

absl::StatusOr<Bytes> RefSign(const GroupPublicKey& gpk,
                              const GroupMemberKey& member, ByteSpan msg,
                              Rng& rng) {
  std::optional<RefPublic> pub = ParseRefPublic(gpk);
  Cursor cur(member.material);
  std::optional<ByteSpan> gid = cur.Take(kGroupIdSize);
  std::optional<BigNum> z = cur.ScalarValue();
  std::optional<ByteSpan> cert = cur.Take(kSchnorrSize);
  if (!pub || !gid || !z || !cert || !cur.Done()) {
    return absl::InvalidArgumentError("malformed reference group key");
  }
  const EcGroup& g = Curve();
  BigNum k = g.RandomScalar(rng);
  Bytes r = g.MulBase(k).Encode();
  Bytes payload;
  AppendUint(payload, member.index, kIndexSize);
  Append(payload, *cert);
  Bytes escrow = crypto::SymEncrypt(EscrowKey(pub->y.Mul(k)), payload, rng);

  Bytes sig = r;
  Append(sig, escrow);
  Append(sig, SchnorrSign(*z, pub->z, RefSignedData(pub->gid, r, escrow, msg),
                          rng));
  return sig;
}

struct RefParts {
  EcPoint r;
  ByteSpan escrow;
};

std::optional<RefParts> RefCheck(const RefPublic& pub, ByteSpan msg,
                                 ByteSpan sig) {
  if (sig.size() != kReferenceSigSize) return std::nullopt;
  Cursor cur(sig);
  std::optional<EcPoint> r = cur.Point();
  if (!r) return std::nullopt;
  ByteSpan escrow = *cur.Take(kEscrowSize);
  ByteSpan schnorr = *cur.Take(kSchnorrSize);
  if (!SchnorrVerify(pub.z,
                     RefSignedData(pub.gid, sig.first(kPointSize), escrow, msg),
                     schnorr)) {
    return std::nullopt;
  }
  return RefParts{*r, escrow};
}

absl::StatusOr<uint32_t> RefTrace(const GroupPublicKey& gpk,
                                  const GroupManagerKey& gmsk, ByteSpan msg,
                                  ByteSpan sig) {
  std::optional<RefPublic> pub = ParseRefPublic(gpk);
  if (!pub) return absl::InvalidArgumentError("malformed group public key");
  Cursor cur(gmsk.material);
  std::optional<ByteSpan> gid = cur.Take(kGroupIdSize);
  std::optional<BigNum> y = cur.ScalarValue();
  if (!gid || !y || !cur.Take(kScalarSize) || !cur.Done() ||
      !std::equal(gid->begin(), gid->end(), pub->gid.begin())) {
    return absl::InvalidArgumentError("manager key does not match group");
  }
  std::optional<RefParts> parts = RefCheck(*pub, msg, sig);
  if (!parts) return absl::InvalidArgumentError("invalid group signature");
  absl::StatusOr<Bytes> payload =
      crypto::SymDecrypt(EscrowKey(parts->r.Mul(*y)), parts->escrow);
  if (!payload.ok() || payload->size() != kIndexSize + kSchnorrSize) {
    return absl::DataLossError("escrow does not open");
  }
  uint32_t index = static_cast<uint32_t>(ReadUint(*payload, 0, kIndexSize));
  if (index < 1 || index > gpk.size ||
      !SchnorrVerify(pub->c, CertificateMessage(pub->gid, index),
                     ByteSpan(*payload).subspan(kIndexSize))) {
    return absl::DataLossError("escrowed certificate invalid");
  }
  return index;
}

// --- Ring backend ----------------------------------------------------------

struct RingPublic {
  Bytes gid;
  EcPoint y;
  std::vector<EcPoint> members;
};

std::optional<RingPublic> ParseRingPublic(const GroupPublicKey& gpk) {
  Cursor cur(gpk.material);
  std::optional<ByteSpan> gid = cur.Take(kGroupIdSize);
  std::optional<EcPoint> y = cur.Point();
  if (!gid || !y || gpk.size == 0) return std::nullopt;
  RingPublic pub{Bytes(gid->begin(), gid->end()), *y, {}};
  for (uint32_t i = 0; i < gpk.size; ++i) {
    std::optional<EcPoint> x = cur.Point();
    if (!x) return std::nullopt;
    pub.members.push_back(*x);
  }
  if (!cur.Done()) return std::nullopt;
  return pub;
}

struct Branch {
  BigNum c, za, zk;
};

// The three commitments of branch j, rebuilt from its challenge and
// responses: A1 = za G - c X_j, A2 = zk G - c C1, A3 = zk Y - c (C2 - X_j).
void AppendCommitments(Bytes& out, const RingPublic& pub, const EcPoint& x,
                       const EcPoint& c1, const EcPoint& c2,
                       const Branch& b) {
  const EcGroup& g = Curve();
  Append(out, g.MulBase(b.za).Sub(x.Mul(b.c)).Encode());
  Append(out, g.MulBase(b.zk).Sub(c1.Mul(b.c)).Encode());
  Append(out, pub.y.Mul(b.zk).Sub(c2.Sub(x).Mul(b.c)).Encode());
}

Bytes RingTranscriptPrefix(const GroupPublicKey& gpk,
                           const EcPoint& c1, const EcPoint& c2) {
  Bytes data = ToBytes("gs-ring");
  Append(data, gpk.material);
  Append(data, c1.Encode());
  Append(data, c2.Encode());
  return data;
}

Group RingGenerate(uint32_t n, Rng& rng) {
  const EcGroup& g = Curve();
  Bytes gid = rng.Generate(kGroupIdSize);
  BigNum y = g.RandomScalar(rng);
  Group out;
  out.gpk = {Backend::kRing, n, gid};
  Append(out.gpk.material, g.MulBase(y).Encode());
  out.gmsk = {Backend::kRing, gid};
  Append(out.gmsk.material, Scalar(y));
  for (uint32_t i = 1; i <= n; ++i) {
    BigNum x = g.RandomScalar(rng);
    Append(out.gpk.material, g.MulBase(x).Encode());
    GroupMemberKey m{Backend::kRing, i, gid};
    Append(m.material, Scalar(x));
    out.members.push_back(std::move(m));
  }
  return out;
}

absl::StatusOr<Bytes> RingSign(const GroupPublicKey& gpk,
                               const GroupMemberKey& member, ByteSpan msg,
                               Rng& rng) {
  std::optional<RingPublic> pub = ParseRingPublic(gpk);
  Cursor cur(member.material);
  std::optional<ByteSpan> gid = cur.Take(kGroupIdSize);
  std::optional<BigNum> x = cur.ScalarValue();
  if (!pub || !gid || !x || !cur.Done()) {
    return absl::InvalidArgumentError("malformed ring group key");
  }
  const EcGroup& g = Curve();
  const BigNum& q = g.order();
  const size_t n = pub->members.size();
  // A foreign member signs in the slot of its own index; the proof then
  // fails to verify because x does not match X_i.
  const size_t me = (member.index >= 1 && member.index <= n)
                        ? member.index - 1
                        : rng.Uniform(n);
  const EcPoint own = g.MulBase(*x);

  BigNum k = g.RandomScalar(rng);
  EcPoint c1 = g.MulBase(k);
  EcPoint c2 = own.Add(pub->y.Mul(k));

  std::vector<Branch> branches(n);
  BigNum a = g.RandomScalar(rng);
  BigNum b = g.RandomScalar(rng);
  BigNum others;
  Bytes transcript = RingTranscriptPrefix(gpk, c1, c2);
  for (size_t j = 0; j < n; ++j) {
    if (j == me) {
      Append(transcript, g.MulBase(a).Encode());
      Append(transcript, g.MulBase(b).Encode());
      Append(transcript, pub->y.Mul(b).Encode());
      continue;
    }
    branches[j] = {g.RandomScalar(rng), g.RandomScalar(rng),
                   g.RandomScalar(rng)};
    others = others.ModAdd(branches[j].c, q);
    AppendCommitments(transcript, *pub, pub->members[j], c1, c2,
                      branches[j]);
  }
  Append(transcript, msg);
  BigNum c = crypto::HashToScalar(g, transcript);
  Branch& mine = branches[me];
  mine.c = c.ModSub(others, q);
  mine.za = a.ModAdd(mine.c.ModMul(*x, q), q);
  mine.zk = b.ModAdd(mine.c.ModMul(k, q), q);

  Bytes sig = c1.Encode();
  Append(sig, c2.Encode());
  for (const Branch& br : branches) {
    Append(sig, Scalar(br.c));
    Append(sig, Scalar(br.za));
    Append(sig, Scalar(br.zk));
  }
  return sig;
}

struct RingParts {
  EcPoint c1, c2;
};

std::optional<RingParts> RingCheck(const RingPublic& pub,
                                   const GroupPublicKey& gpk, ByteSpan msg,
                                   ByteSpan sig) {
  const size_t n = pub.members.size();
  if (sig.size() != 2 * kPointSize + n * kRingBranchSize) return std::nullopt;
  Cursor cur(sig);
  std::optional<EcPoint> c1 = cur.Point();
  std::optional<EcPoint> c2 = cur.Point();
  if (!c1 || !c2) return std::nullopt;
  const EcGroup& g = Curve();
  Bytes transcript = RingTranscriptPrefix(gpk, *c1, *c2);
  BigNum sum;
  for (size_t j = 0; j < n; ++j) {
    std::optional<BigNum> c = cur.ScalarValue();
    std::optional<BigNum> za = cur.ScalarValue();
    std::optional<BigNum> zk = cur.ScalarValue();
    if (!c || !za || !zk) return std::nullopt;
    sum = sum.ModAdd(*c, g.order());
    AppendCommitments(transcript, pub, pub.members[j], *c1, *c2,
                      {*c, *za, *zk});
  }
  Append(transcript, msg);
  if (crypto::HashToScalar(g, transcript) != sum) return std::nullopt;
  return RingParts{*c1, *c2};
}

absl::StatusOr<uint32_t> RingTrace(const GroupPublicKey& gpk,
                                   const GroupManagerKey& gmsk, ByteSpan msg,
                                   ByteSpan sig) {
  std::optional<RingPublic> pub = ParseRingPublic(gpk);
  if (!pub) return absl::InvalidArgumentError("malformed group public key");
  Cursor cur(gmsk.material);
  std::optional<ByteSpan> gid = cur.Take(kGroupIdSize);
  std::optional<BigNum> y = cur.ScalarValue();
  if (!gid || !y || !cur.Done() ||
      !std::equal(gid->begin(), gid->end(), pub->gid.begin())) {
    return absl::InvalidArgumentError("manager key does not match group");
  }
  std::optional<RingParts> parts = RingCheck(*pub, gpk, msg, sig);
  if (!parts) return absl::InvalidArgumentError("invalid group signature");
  EcPoint x = parts->c2.Sub(parts->c1.Mul(*y));
  for (size_t j = 0; j < pub->members.size(); ++j) {
    if (pub->members[j] == x) return static_cast<uint32_t>(j + 1);
  }
  return absl::DataLossError("decrypted key is not a member");
}

absl::StatusOr<wire::TlvReader> OpenGroupFile(ByteSpan file,
                                              wire::KeyFileKind kind,
                                              Backend expected) {
  absl::StatusOr<wire::TlvReader> r = wire::OpenKeyFile(file, kind);
  if (!r.ok()) return r.status();
  absl::StatusOr<Bytes> tag = r->Get(kTagBackend);
  if (!tag.ok()) return tag.status();
  if (tag->size() != 1 || (*tag)[0] != static_cast<uint8_t>(expected)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "key file is not a ", BackendName(expected), " group key"));
  }
  return r;
}

}  // namespace

std::string BackendName(Backend backend) {
  return backend == Backend::kReference ? "reference" : "ring";
}

absl::StatusOr<Backend> ParseBackend(const std::string& name) {
  if (name == "reference") return Backend::kReference;
  if (name == "ring") return Backend::kRing;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown group signature backend '", name, "'"));
}

absl::StatusOr<Group> Generate(Backend backend, uint32_t n, Rng& rng) {
  if (n == 0) return absl::InvalidArgumentError("group size must be >= 1");
  if (n > 0xffff) return absl::InvalidArgumentError("group too large");
  return backend == Backend::kReference ? RefGenerate(n, rng)
                                        : RingGenerate(n, rng);
}

absl::StatusOr<Bytes> Sign(const GroupPublicKey& gpk,
                           const GroupMemberKey& member, ByteSpan msg,
                           Rng& rng) {
  if (gpk.backend != member.backend) {
    return absl::FailedPreconditionError("member key from another backend");
  }
  return gpk.backend == Backend::kReference ? RefSign(gpk, member, msg, rng)
                                            : RingSign(gpk, member, msg, rng);
}

bool Verify(const GroupPublicKey& gpk, ByteSpan msg, ByteSpan sig) {
  if (gpk.backend == Backend::kReference) {
    std::optional<RefPublic> pub = ParseRefPublic(gpk);
    return pub && RefCheck(*pub, msg, sig).has_value();
  }
  std::optional<RingPublic> pub = ParseRingPublic(gpk);
  return pub && RingCheck(*pub, gpk, msg, sig).has_value();
}

absl::StatusOr<uint32_t> Trace(const GroupPublicKey& gpk,
                               const GroupManagerKey& gmsk, ByteSpan msg,
                               ByteSpan sig) {
  if (gpk.backend != gmsk.backend) {
    return absl::FailedPreconditionError("manager key from another backend");
  }
  return gpk.backend == Backend::kReference ? RefTrace(gpk, gmsk, msg, sig)
                                            : RingTrace(gpk, gmsk, msg, sig);
}

size_t SignatureSize(const GroupPublicKey& gpk) {
  return gpk.backend == Backend::kReference
             ? kReferenceSigSize
             : 2 * kPointSize + gpk.size * kRingBranchSize;
}

Bytes EncodePublicKey(const GroupPublicKey& key) {
  wire::TlvWriter w;
  w.Add(kTagBackend, Bytes{static_cast<uint8_t>(key.backend)})
      .AddU64(kTagSize, key.size)
      .Add(kTagBody, key.material);
  return wire::WrapKeyFile(wire::KeyFileKind::kGroupPublic, w.bytes());
}

absl::StatusOr<GroupPublicKey> DecodePublicKey(ByteSpan file,
                                               Backend expected) {
  absl::StatusOr<wire::TlvReader> r =
      OpenGroupFile(file, wire::KeyFileKind::kGroupPublic, expected);
  if (!r.ok()) return r.status();
  absl::StatusOr<uint64_t> size = r->GetU64(kTagSize);
  absl::StatusOr<Bytes> body = r->Get(kTagBody);
  if (!size.ok()) return size.status();
  if (!body.ok()) return body.status();
  GroupPublicKey key{expected, static_cast<uint32_t>(*size), *body};
  bool ok = expected == Backend::kReference
                ? ParseRefPublic(key).has_value()
                : ParseRingPublic(key).has_value();
  if (!ok || *size == 0 || *size > 0xffff) {
    return absl::InvalidArgumentError("malformed group public key");
  }
  return key;
}

Bytes EncodeManagerKey(const GroupManagerKey& key) {
  wire::TlvWriter w;
  w.Add(kTagBackend, Bytes{static_cast<uint8_t>(key.backend)})
      .Add(kTagBody, key.material);
  return wire::WrapKeyFile(wire::KeyFileKind::kGroupManager, w.bytes());
}

absl::StatusOr<GroupManagerKey> DecodeManagerKey(ByteSpan file,
                                                 Backend expected) {
  absl::StatusOr<wire::TlvReader> r =
      OpenGroupFile(file, wire::KeyFileKind::kGroupManager, expected);
  if (!r.ok()) return r.status();
  absl::StatusOr<Bytes> body = r->Get(kTagBody);
  if (!body.ok()) return body.status();
  return GroupManagerKey{expected, *body};
}

Bytes EncodeMemberKey(const GroupMemberKey& key) {
  wire::TlvWriter w;
  w.Add(kTagBackend, Bytes{static_cast<uint8_t>(key.backend)})
      .AddU64(kTagIndex, key.index)
      .Add(kTagBody, key.material);
  return wire::WrapKeyFile(wire::KeyFileKind::kGroupMember, w.bytes());
}

absl::StatusOr<GroupMemberKey> DecodeMemberKey(ByteSpan file,
                                               Backend expected) {
  absl::StatusOr<wire::TlvReader> r =
      OpenGroupFile(file, wire::KeyFileKind::kGroupMember, expected);
  if (!r.ok()) return r.status();
  absl::StatusOr<uint64_t> index = r->GetU64(kTagIndex);
  absl::StatusOr<Bytes> body = r->Get(kTagBody);
  if (!index.ok()) return index.status();
  if (!body.ok()) return body.status();
  if (*index == 0 || *index > 0xffff) {
    return absl::InvalidArgumentError("member index out of range");
  }
  return GroupMemberKey{expected, static_cast<uint32_t>(*index), *body};
}

absl::StatusOr<Backend> PeekBackend(ByteSpan file) {
  if (file.size() < 5) return absl::InvalidArgumentError("not a key file");
  absl::StatusOr<wire::TlvReader> r = wire::TlvReader::Parse(file.subspan(5));
  if (!r.ok()) return r.status();
  absl::StatusOr<Bytes> tag = r->Get(kTagBackend);
  if (!tag.ok()) return tag.status();
  if (tag->size() == 1 && (*tag)[0] == 1) return Backend::kReference;
  if (tag->size() == 1 && (*tag)[0] == 2) return Backend::kRing;
  return absl::InvalidArgumentError("unknown group backend tag");
}

}  // namespace carsec::groupsig
