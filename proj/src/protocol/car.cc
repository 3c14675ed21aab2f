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

}  // namespace

Car::Car(std::string name, const Deployment& deployment, uint64_t seed)
    : Actor(std::move(name), deployment, seed) {}

std::vector<Envelope> Car::Receive(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!wire::Encode(m).ok()) return Fail(in, Reason::kMalformed, "", now);
  if (m.procedure == Procedure::kSetup) return OnSetup(in, now);
  if (!initialized_) return Fail(in, Reason::kNotInitialized, "", now);
  switch (m.procedure) {
    case Procedure::kSetRoot:
      if (m.step == 4) return OnSetRoot(in, now);
      break;
    case Procedure::kUploadGpk:
      if (m.step == 1) return OnUploadStep1(in, now);
      if (m.step == 3) return OnUploadStep3(in, now);
      break;
    case Procedure::kExecute:
      if (m.step == 1) return OnExecuteStep1(in, now);
      if (m.step == 3) return OnExecuteStep3(in, now);
      break;
    case Procedure::kExecuteOtf:
      if (m.step == 1) return OnOtfStep1(in, now);
      if (m.step == 3) return OnOtfStep3(in, now);
      break;
    default:
      break;
  }
  return Fail(in, Reason::kUnexpectedStep, "", now);
}

std::vector<Envelope> Car::OnSetup(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!in.trusted) return Fail(in, Reason::kUntrustedChannel, "", now);
  if (initialized_) return Fail(in, Reason::kAlreadyInitialized, "", now);
  absl::StatusOr<ibs::PublicParams> params =
      ibs::DecodePublicParams(*m.Find(Tag::kIbsParams));
  absl::StatusOr<ibs::UserKey> key = ibs::DecodeUserKey(*m.Find(Tag::kCarKey));
  if (!params.ok() || !key.ok()) {
    return Fail(in, Reason::kMalformed, "key material", now);
  }
  std::string car_id = *FieldString(m, Tag::kCarId);
  if (ToString(key->identity) != car_id || key->params.n != params->n ||
      key->params.scheme != params->scheme) {
    return Fail(in, Reason::kWrongCar, "key does not match car id", now);
  }
  absl::StatusOr<policy::PermissionTable> table =
      policy::PermissionTable::Load(*FieldString(m, Tag::kPolicy));
  if (!table.ok()) {
    return Fail(in, Reason::kMalformed,
                absl::StrCat("policy: ", table.status().message()), now);
  }
  deployment_.ibs = *std::move(params);
  manufacturer_ = *FieldString(m, Tag::kManufacturer);
  car_id_ = std::move(car_id);
  key_ = *std::move(key);
  policy_ = *std::move(table);
  initialized_ = true;
  return {};
}

std::vector<Envelope> Car::OnSetRoot(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (owner_) return Fail(in, Reason::kOwnerAlreadySet, "", now);
  absl::StatusOr<Message> inst = wire::Decode(*m.Find(Tag::kEmbedded));
  if (!inst.ok() || inst->procedure != Procedure::kSetRoot ||
      inst->step != 2) {
    return Fail(in, Reason::kMalformed, "embedded installation", now);
  }
  if (*FieldString(*inst, Tag::kAction) != kActInstallSeller) {
    return Fail(in, Reason::kMalformed, "installation action", now);
  }
  if (*FieldString(*inst, Tag::kCarId) != car_id_) {
    return Fail(in, Reason::kWrongCar, "installation for another car", now);
  }
  std::string seller = *FieldString(m, Tag::kSeller);
  if (*FieldString(*inst, Tag::kSeller) != seller) {
    return Fail(in, Reason::kWrongPeer, "installation for another seller",
                now);
  }
  std::optional<uint64_t> t_start = FieldTime(m, Tag::kTStart);
  std::optional<uint64_t> t_stop = FieldTime(m, Tag::kTStop);
  if (!t_start || !t_stop) return Fail(in, Reason::kMalformed, "", now);
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(manufacturer_, *inst)) {
    return Fail(in, Reason::kBadSignature, "manufacturer installation", now);
  }
  if (!VerifyIbs(seller, m)) {
    return Fail(in, Reason::kBadSignature, "seller", now);
  }
  owner_ = *FieldString(m, Tag::kPseudonym);
  owner_t_start_ = *t_start;
  seller_ = std::move(seller);
  return {};
}

std::vector<Envelope> Car::OnUploadStep1(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!owner_) return Fail(in, Reason::kNoOwner, "", now);
  if (*FieldString(m, Tag::kPseudonym) != *owner_) {
    return Fail(in, Reason::kNotRoot, *FieldString(m, Tag::kPseudonym), now);
  }
  if (*FieldString(m, Tag::kCarId) != car_id_) {
    return Fail(in, Reason::kWrongCar, "", now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(*owner_, m)) {
    return Fail(in, Reason::kBadSignature, "owner", now);
  }
  Bytes nonce = rng_.Generate(kNonceSize);
  uploads_[nonce] = PendingUpload{*m.Find(Tag::kNonceA)};
  Message out = Start(Procedure::kUploadGpk, 2);
  out.Add(Tag::kNonceA, *m.Find(Tag::kNonceA))
      .Add(Tag::kNonceB, nonce)
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(*key_, out);
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> Car::OnUploadStep3(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  auto it = uploads_.find(*m.Find(Tag::kNonceB));
  if (it == uploads_.end() || it->second.nonce_own != *m.Find(Tag::kNonceA)) {
    return Fail(in, Reason::kNonceMismatch, "", now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(*owner_, m)) {
    return Fail(in, Reason::kBadSignature, "owner", now);
  }
  std::string role = *FieldString(m, Tag::kRole);
  if (!policy_.HasRole(role)) return Fail(in, Reason::kUnknownRole, role, now);
  absl::StatusOr<groupsig::GroupPublicKey> gpk =
      groupsig::DecodePublicKey(*m.Find(Tag::kGpk), deployment_.backend);
  std::optional<uint64_t> t_start = FieldTime(m, Tag::kTStart);
  std::optional<uint64_t> t_stop = FieldTime(m, Tag::kTStop);
  if (!gpk.ok() || !t_start || !t_stop) {
    return Fail(in, Reason::kMalformed, "", now);
  }
  role_keys_.insert_or_assign(role, RoleKey{*std::move(gpk), *t_start,
                                            *t_stop});
  uploads_.erase(it);
  Message out = Start(Procedure::kUploadGpk, 4);
  out.Add(Tag::kAction, ToBytes(kActConfirm))
      .Add(Tag::kEmbedded, wire::SignedPortion(m))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(*key_, out);
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> Car::OnExecuteStep1(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!owner_) return Fail(in, Reason::kNoOwner, "", now);
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  std::erase_if(seen_nonces_, [now](const auto& kv) {
    return kv.second + 2 * kMaxSkewSeconds < now;
  });
  const Bytes& nonce = *m.Find(Tag::kNonceA);
  if (seen_nonces_.contains(nonce)) return Fail(in, Reason::kReplay, "", now);

  std::string role = *FieldString(m, Tag::kRole);
  if (!policy_.HasRole(role)) return Fail(in, Reason::kUnknownRole, role, now);
  absl::StatusOr<policy::Attributes> attrs =
      policy::DecodeAttributes(*m.Find(Tag::kAttributes));
  if (!attrs.ok()) return Fail(in, Reason::kMalformed, "attributes", now);

  if (m.auth_kind == wire::AuthKind::kGroup) {
    auto rk = role_keys_.find(role);
    if (rk == role_keys_.end()) {
      return Fail(in, Reason::kUnknownRole, "no group key for role", now);
    }
    if (now < rk->second.t_start || now > rk->second.t_stop) {
      return Fail(in, Reason::kExpired, "role key", now);
    }
    if (!VerifyGroup(rk->second.gpk, wire::SignedPortion(m), m.auth)) {
      return Fail(in, Reason::kGroupSignature, "", now);
    }
  } else {
    std::string user = *FieldString(m, Tag::kPseudonym);
    if (revocations_.IsRevoked(RevocationTarget::kPseudonym, ToBytes(user),
                               now)) {
      return Fail(in, Reason::kRevoked, "pseudonym", now);
    }
    Credential cred{*m.Find(Tag::kCredentialClaim),
                    *m.Find(Tag::kCredentialSig)};
    crypto::Digest digest = TokenDigest(cred);
    if (revocations_.IsRevoked(RevocationTarget::kTokenDigest, digest, now)) {
      return Fail(in, Reason::kRevoked, "token", now);
    }
    absl::StatusOr<Claim> claim = DecodeClaim(cred.claim);
    if (!claim.ok() || claim->pseudonym != user || claim->role != role ||
        policy::EncodeAttributes(claim->attributes) !=
            *m.Find(Tag::kAttributes)) {
      return Fail(in, Reason::kCredential, "claim does not match request",
                  now);
    }
    if (revocations_.IsRevoked(RevocationTarget::kPseudonym,
                               ToBytes(claim->delegator), now)) {
      return Fail(in, Reason::kRevoked, "delegator", now);
    }
    if (now < claim->t_start || now > claim->t_stop) {
      return Fail(in, Reason::kExpired, "credential window", now);
    }
    const RoleKey* root = RootKey();
    if (root == nullptr ||
        !VerifyGroup(root->gpk, cred.claim, cred.signature)) {
      return Fail(in, Reason::kCredential, "owner signature", now);
    }
    if (!VerifyIbs(user, m)) {
      return Fail(in, Reason::kBadSignature, "user", now);
    }
  }
  seen_nonces_[nonce] = now;

  ++counters_.kem_keygen;
  absl::StatusOr<crypto::KemKeyPair> kem = GenerateKem(deployment_, rng_);
  if (!kem.ok()) return Fail(in, Reason::kMalformed, "KEM keygen", now);
  Bytes sid = FreshSessionId();
  Message out = Start(Procedure::kExecute, 2);
  out.Add(Tag::kEphemeralKey, kem->public_key())
      .Add(Tag::kNonceB, rng_.Generate(kNonceSize))
      .Add(Tag::kSessionId, sid)
      .Add(Tag::kTruncSig, TruncBytes(m.auth))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(*key_, out);
  executes_.insert_or_assign(
      sid, PendingExecute{*std::move(kem), role, *std::move(attrs),
                          ibs::Truncate64(out.auth)});
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> Car::OnExecuteStep3(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  const Bytes& sid = *m.Find(Tag::kSessionId);
  auto it = executes_.find(sid);
  if (it == executes_.end()) return Fail(in, Reason::kUnknownSession, "", now);
  PendingExecute& p = it->second;
  ++counters_.kem_decap;
  absl::StatusOr<crypto::SymmetricKey> kses =
      crypto::KemDecapsulate(p.kem, *m.Find(Tag::kKemCiphertext));
  if (!kses.ok()) return Fail(in, Reason::kDecryptFailure, "KEM", now);
  if (!VerifyMac(*kses, m)) return Fail(in, Reason::kMacFailure, "", now);
  absl::StatusOr<Bytes> plain = Open(*kses, *m.Find(Tag::kSealedCommand));
  if (!plain.ok()) return Fail(in, Reason::kDecryptFailure, "command", now);
  if (plain->size() < ibs::kTruncatedSize) {
    return Fail(in, Reason::kMalformed, "command", now);
  }
  ByteSpan body(plain->data(), plain->size() - ibs::kTruncatedSize);
  ByteSpan trunc(plain->data() + body.size(), ibs::kTruncatedSize);
  if (!std::equal(trunc.begin(), trunc.end(), p.s_car.begin())) {
    return Fail(in, Reason::kTruncationMismatch, "", now);
  }
  absl::StatusOr<Command> cmd = DecodeCommand(body);
  if (!cmd.ok()) return Fail(in, Reason::kMalformed, "command", now);
  policy::Decision d =
      policy_.Check(p.role, cmd->object, cmd->action, p.attributes, now);
  if (!d.allowed) {
    return Fail(in, Reason::kPolicyDeny,
                absl::StrCat(p.role, " ", RenderCommand(*cmd), ": ",
                             policy::DenyReasonName(d.reason)),
                now);
  }
  executed_.push_back(
      ExecutedAction{Procedure::kExecute, sid, p.role, *cmd,
                     p.attributes, now});
  sessions_.insert_or_assign(
      sid, SessionState{sid, *kses, p.role, p.attributes, now,
                        deployment_.session_lifetime});
  ++sessions_established_;
  executes_.erase(it);
  return {};
}

std::vector<Envelope> Car::OnOtfStep1(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  const Bytes& sid = *m.Find(Tag::kSessionId);
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return Fail(in, Reason::kUnknownSession, "", now);
  const SessionState& s = it->second;
  if (now >= s.established_at + s.lifetime) {
    return Fail(in, Reason::kSessionExpired, "", now);
  }
  if (!VerifyMac(s.kses, m)) return Fail(in, Reason::kMacFailure, "", now);
  absl::StatusOr<Bytes> plain = Open(s.kses, *m.Find(Tag::kSealedCommand));
  if (!plain.ok()) return Fail(in, Reason::kDecryptFailure, "command", now);
  absl::StatusOr<Command> cmd = DecodeCommand(*plain);
  if (!cmd.ok()) return Fail(in, Reason::kMalformed, "command", now);
  Message out = Start(Procedure::kExecuteOtf, 2);
  out.Add(Tag::kNonceB, rng_.Generate(kNonceSize))
      .Add(Tag::kTruncSig, TruncBytes(m.auth));
  SignMac(s.kses, out);
  otfs_.insert_or_assign(sid, PendingOtf{*std::move(cmd), out.auth});
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> Car::OnOtfStep3(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  const Bytes& sid = *m.Find(Tag::kSessionId);
  auto p = otfs_.find(sid);
  auto s = sessions_.find(sid);
  if (p == otfs_.end() || s == sessions_.end()) {
    return Fail(in, Reason::kUnknownSession, "", now);
  }
  const SessionState& st = s->second;
  if (now >= st.established_at + st.lifetime) {
    return Fail(in, Reason::kSessionExpired, "", now);
  }
  if (!VerifyMac(st.kses, m)) return Fail(in, Reason::kMacFailure, "", now);
  ++counters_.mac;
  if (!crypto::MacVerify(st.kses, p->second.s_car, *m.Find(Tag::kEcho))) {
    return Fail(in, Reason::kMacFailure, "challenge echo", now);
  }
  const Command cmd = p->second.command;
  policy::Decision d =
      policy_.Check(st.role, cmd.object, cmd.action, st.attributes, now);
  if (!d.allowed) {
    otfs_.erase(p);
    return Fail(in, Reason::kPolicyDeny,
                absl::StrCat(st.role, " ", RenderCommand(cmd), ": ",
                             policy::DenyReasonName(d.reason)),
                now);
  }
  executed_.push_back(
      ExecutedAction{Procedure::kExecuteOtf, sid, st.role, cmd,
                     st.attributes, now});
  otfs_.erase(p);
  return {};
}

const Car::RoleKey* Car::RootKey() const {
  const std::optional<std::string>& root = policy_.root_role();
  if (!root) return nullptr;
  auto it = role_keys_.find(*root);
  return it == role_keys_.end() ? nullptr : &it->second;
}

Bytes Car::FreshSessionId() {
  for (;;) {
    Bytes sid = rng_.Generate(kSessionIdSize);
    if (!sessions_.contains(sid) && !executes_.contains(sid)) return sid;
  }
}

absl::Status Car::Revoke(const RevocationRequest& request, uint64_t now) {
  if (!initialized_ || !owner_) {
    return absl::FailedPreconditionError("car has no owner");
  }
  if (!Fresh(request.timestamp, now)) {
    return absl::DeadlineExceededError("stale revocation");
  }
  ++counters_.ibs_verify;
  if (!ibs::VerifyEncoded(deployment_.ibs, ToBytes(request.authority),
                          RevocationSignedBytes(request),
                          request.signature)) {
    return absl::PermissionDeniedError("bad revocation signature");
  }
  bool authorized = request.authority == *owner_;
  if (!authorized && request.credential) {
    const Credential& cred = *request.credential;
    absl::StatusOr<Claim> claim = DecodeClaim(cred.claim);
    const RoleKey* root = RootKey();
    if (claim.ok() && claim->delegator == request.authority &&
        root != nullptr) {
      crypto::Digest digest = TokenDigest(cred);
      const bool matches =
          request.kind == RevocationTarget::kPseudonym
              ? ToBytes(claim->pseudonym) == request.target
              : Bytes(digest.begin(), digest.end()) == request.target;
      ++counters_.gs_verify;
      authorized =
          matches && groupsig::Verify(root->gpk, cred.claim,
                                      cred.signature);
    }
  }
  if (!authorized) {
    return absl::PermissionDeniedError(
        absl::StrCat(request.authority, " may not revoke this target"));
  }
  revocations_.Append(
      RevocationEntry{request.kind, request.target, now, request.authority});
  return absl::OkStatus();
}

}  // namespace carsec::protocol
