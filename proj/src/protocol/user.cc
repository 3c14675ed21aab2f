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


#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "carsec/protocol/actors.h"

namespace carsec::protocol {

using wire::Message;
using wire::Procedure;
using wire::Tag;

namespace {

Bytes TruncBytes(ByteSpan encoded) {
  ibs::TruncatedSignature t = ibs::Truncate64(encoded);
  return Bytes(t.begin(), t.end());
}

Bytes DigestBytes(ByteSpan data) {
  crypto::Digest d = crypto::Hash(data);
  return Bytes(d.begin(), d.end());
}

}  // namespace

User::User(std::string pseudonym, const Deployment& deployment, uint64_t seed,
           ibs::UserKey key)
    : Actor(std::move(pseudonym), deployment, seed), key_(std::move(key)) {}

const DelegationToken* User::token(const std::string& role) const {
  auto it = tokens_.find(role);
  return it == tokens_.end() ? nullptr : &it->second;
}

size_t User::sealed_pending() const {
  size_t n = 0;
  for (const auto& [conn, d] : delegations_) n += d.sealed_token ? 1 : 0;
  return n;
}

const User::Session* User::session(const std::string& car) const {
  auto it = sessions_.find(car);
  return it == sessions_.end() ? nullptr : &it->second;
}

absl::StatusOr<Envelope> User::BeginDelegate(
    const std::string& owner, const std::string& role, DelegationKind kind,
    const policy::Attributes& attributes, uint64_t t_start, uint64_t t_stop,
    uint64_t conn, uint64_t now) {
  ++counters_.kem_keygen;
  absl::StatusOr<crypto::KemKeyPair> kem = GenerateKem(deployment_, rng_);
  if (!kem.ok()) return kem.status();
  Bytes nonce = rng_.Generate(kNonceSize);
  Message msg = Start(Procedure::kDelegate, 1);
  msg.Add(Tag::kPseudonym, ToBytes(name_))
      .Add(Tag::kRole, ToBytes(role))
      .Add(Tag::kAttributes, policy::EncodeAttributes(attributes))
      .Add(Tag::kTStart, EncodeTimestamp(t_start))
      .Add(Tag::kTStop, EncodeTimestamp(t_stop))
      .Add(Tag::kDelegationKind, Bytes{static_cast<uint8_t>(kind)})
      .Add(Tag::kEphemeralKey, kem->public_key())
      .Add(Tag::kNonceA, nonce)
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, msg);
  delegations_.insert_or_assign(
      conn, PendingDelegation{owner, role, kind, attributes, *std::move(kem),
                              wire::SignedPortion(msg), msg.auth, nonce,
                              std::nullopt});
  return Send(owner, conn, std::move(msg));
}

absl::StatusOr<Envelope> User::BeginExecute(const std::string& car,
                                            const std::string& car_id,
                                            const std::string& role,
                                            const Command& command,
                                            uint64_t conn, uint64_t now) {
  const DelegationToken* tok = token(role);
  if (tok == nullptr) {
    return absl::FailedPreconditionError(
        absl::StrCat(name_, " holds no token for ", role));
  }
  Bytes nonce = rng_.Generate(kNonceSize);
  Message msg = Start(Procedure::kExecute, 1);
  msg.Add(Tag::kNonceA, nonce)
      .Add(Tag::kRole, ToBytes(role))
      .Add(Tag::kAttributes, policy::EncodeAttributes(tok->attributes))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  if (tok->kind == DelegationKind::kPersistent) {
    absl::Status s = SignGroup(*tok->gpk, *tok->member, msg);
    if (!s.ok()) return s;
  } else {
    msg.Add(Tag::kPseudonym, ToBytes(name_))
        .Add(Tag::kCredentialClaim, tok->credential->claim)
        .Add(Tag::kCredentialSig, tok->credential->signature);
    SignIbs(key_, msg);
  }
  executes_.insert_or_assign(
      conn, PendingExecute{car, car_id, command, nonce, msg.auth});
  return Send(car, conn, std::move(msg));
}

absl::StatusOr<Envelope> User::BeginOtf(const std::string& car,
                                        const Command& command, uint64_t conn,
                                        uint64_t now) {
  (void)now;
  auto it = sessions_.find(car);
  if (it == sessions_.end()) {
    return absl::FailedPreconditionError(
        absl::StrCat(name_, " has no session with ", car));
  }
  const Session& s = it->second;
  Message msg = Start(Procedure::kExecuteOtf, 1);
  msg.Add(Tag::kSessionId, s.sid)
      .Add(Tag::kSealedCommand, Seal(s.kses, EncodeCommand(command)));
  SignMac(s.kses, msg);
  otfs_.insert_or_assign(conn, PendingOtf{car, msg.auth});
  return Send(car, conn, std::move(msg));
}

std::vector<Envelope> User::Receive(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!wire::Encode(m).ok()) return Fail(in, Reason::kMalformed, "", now);
  if (m.procedure == Procedure::kDelegate && m.step == 2) {
    return OnDelegateStep2(in, now);
  }
  if (m.procedure == Procedure::kDelegate && m.step == 4) {
    return OnDelegateStep4(in, now);
  }
  if (m.procedure == Procedure::kExecute && m.step == 2) {
    return OnExecuteStep2(in, now);
  }
  if (m.procedure == Procedure::kExecuteOtf && m.step == 2) {
    return OnOtfStep2(in, now);
  }
  return Fail(in, Reason::kUnexpectedStep, "", now);
}

std::vector<Envelope> User::OnDelegateStep2(const Envelope& in,
                                            uint64_t now) {
  const Message& m = in.msg;
  auto it = delegations_.find(in.conn);
  if (it == delegations_.end() || it->second.sealed_token) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  PendingDelegation& d = it->second;
  if (*m.Find(Tag::kNonceA) != d.nonce_usr) {
    return Fail(in, Reason::kNonceMismatch, "", now);
  }
  if (*m.Find(Tag::kTruncSig) != TruncBytes(d.s_usr)) {
    return Fail(in, Reason::kTruncationMismatch, "", now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!owner_gpk_ ||
      !VerifyGroup(*owner_gpk_, wire::SignedPortion(m), m.auth)) {
    return Fail(in, Reason::kGroupSignature, "owner reply", now);
  }
  d.sealed_token = *m.Find(Tag::kSealedToken);
  Message out = Start(Procedure::kDelegate, 3);
  out.Add(Tag::kRequestDigest, DigestBytes(d.step1_portion))
      .Add(Tag::kResponseDigest, DigestBytes(*wire::Encode(m)))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, out);
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> User::OnDelegateStep4(const Envelope& in,
                                            uint64_t now) {
  const Message& m = in.msg;
  auto it = delegations_.find(in.conn);
  if (it == delegations_.end() || !it->second.sealed_token) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  PendingDelegation& d = it->second;
  ++counters_.kem_decap;
  absl::StatusOr<crypto::SymmetricKey> kses =
      crypto::KemDecapsulate(d.kem, *m.Find(Tag::kKemCiphertext));
  if (!kses.ok()) return Fail(in, Reason::kDecryptFailure, "KEM", now);
  absl::StatusOr<Bytes> plain = Open(*kses, *d.sealed_token);
  if (!plain.ok()) return Fail(in, Reason::kDecryptFailure, "token", now);
  absl::StatusOr<DelegationToken> tok =
      DecodeToken(*plain, deployment_.backend);
  if (!tok.ok() || tok->kind != d.kind) {
    return Fail(in, Reason::kMalformed, "token", now);
  }
  if (tok->kind == DelegationKind::kEphemeral) {
    absl::StatusOr<Claim> claim = DecodeClaim(tok->credential->claim);
    if (!claim.ok() || claim->pseudonym != name_ || claim->role != d.role ||
        !VerifyGroup(*owner_gpk_, tok->credential->claim,
                     tok->credential->signature)) {
      return Fail(in, Reason::kCredential, "", now);
    }
  }
  tokens_.insert_or_assign(d.role, *std::move(tok));
  delegations_.erase(it);
  return {};
}

std::vector<Envelope> User::OnExecuteStep2(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  auto it = executes_.find(in.conn);
  if (it == executes_.end()) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  const PendingExecute& p = it->second;
  // The user's nonce is bound through the truncated step-1 signature.
  if (*m.Find(Tag::kTruncSig) != TruncBytes(p.s_usr)) {
    return Fail(in, Reason::kTruncationMismatch, "", now);
  }
  const Bytes& sid = *m.Find(Tag::kSessionId);
  if (sid.size() != kSessionIdSize) {
    return Fail(in, Reason::kMalformed, "session id", now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(p.car_id, m)) {
    return Fail(in, Reason::kBadSignature, "car challenge", now);
  }
  ++counters_.kem_encap;
  absl::StatusOr<crypto::Encapsulation> enc =
      crypto::KemEncapsulate(*m.Find(Tag::kEphemeralKey), rng_);
  if (!enc.ok()) return Fail(in, Reason::kMalformed, "car key", now);
  Bytes plain = EncodeCommand(p.command);
  Append(plain, TruncBytes(m.auth));
  Message out = Start(Procedure::kExecute, 3);
  out.Add(Tag::kSessionId, sid)
      .Add(Tag::kKemCiphertext, enc->ciphertext)
      .Add(Tag::kSealedCommand, Seal(enc->shared, plain));
  SignMac(enc->shared, out);
  sessions_.insert_or_assign(p.car, Session{sid, enc->shared});
  Envelope env = Reply(in, std::move(out));
  executes_.erase(it);
  return {std::move(env)};
}

std::vector<Envelope> User::OnOtfStep2(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  auto it = otfs_.find(in.conn);
  if (it == otfs_.end()) return Fail(in, Reason::kUnexpectedStep, "", now);
  auto s = sessions_.find(it->second.car);
  if (s == sessions_.end()) {
    return Fail(in, Reason::kUnknownSession, "", now);
  }
  const crypto::SymmetricKey& kses = s->second.kses;
  if (!VerifyMac(kses, m)) return Fail(in, Reason::kMacFailure, "", now);
  if (*m.Find(Tag::kTruncSig) != TruncBytes(it->second.tag)) {
    return Fail(in, Reason::kTruncationMismatch, "", now);
  }
  ++counters_.mac;
  crypto::MacTag echo = crypto::MacSign(kses, m.auth);
  Message out = Start(Procedure::kExecuteOtf, 3);
  out.Add(Tag::kSessionId, s->second.sid)
      .Add(Tag::kEcho, Bytes(echo.begin(), echo.end()));
  SignMac(kses, out);
  otfs_.erase(it);
  return {Reply(in, std::move(out))};
}

RevocationRequest User::MakeRevocation(RevocationTarget kind, Bytes target,
                                       std::optional<Credential> credential,
                                       uint64_t now) {
  ++counters_.ibs_sign;
  RevocationRequest r;
  r.authority = name_;
  r.kind = kind;
  r.target = std::move(target);
  r.credential = std::move(credential);
  r.timestamp = now;
  return SignRevocation(std::move(r), key_, rng_);
}

}  // namespace carsec::protocol
