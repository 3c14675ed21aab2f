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


#include <algorithm>

#include "absl/strings/str_cat.h"
#include "carsec/protocol/actors.h"

namespace carsec::protocol {

using wire::Message;
using wire::Procedure;
using wire::Tag;

Owner::Owner(std::string pseudonym, const Deployment& deployment,
             uint64_t seed, ibs::UserKey key, std::string root_role)
    : Actor(std::move(pseudonym), deployment, seed),
      key_(std::move(key)),
      root_role_(std::move(root_role)) {
  RoleGroup* own = *EnsureGroup(root_role_);
  owner_member_ = own->group.members[own->next_member++];
}

const groupsig::GroupPublicKey& Owner::owner_gpk() const {
  return groups_.at(root_role_).group.gpk;
}

bool Owner::HasGroup(const std::string& role) const {
  return groups_.contains(role);
}

const groupsig::GroupPublicKey* Owner::GroupKey(const std::string& role) const {
  auto it = groups_.find(role);
  return it == groups_.end() ? nullptr : &it->second.group.gpk;
}

const groupsig::Group* Owner::group(const std::string& role) const {
  auto it = groups_.find(role);
  return it == groups_.end() ? nullptr : &it->second.group;
}

absl::StatusOr<Owner::RoleGroup*> Owner::EnsureGroup(const std::string& role) {
  auto it = groups_.find(role);
  if (it != groups_.end()) return &it->second;
  absl::StatusOr<groupsig::Group> g = groupsig::Generate(
      deployment_.backend, deployment_.group_size, rng_);
  if (!g.ok()) return g.status();
  return &groups_.emplace(role, RoleGroup{*std::move(g), 0}).first->second;
}

Envelope Owner::BeginSetRoot(const std::string& seller, uint64_t conn,
                             const std::string& owner_data, uint64_t now) {
  Message msg = Start(Procedure::kSetRoot, 3);
  msg.Add(Tag::kOwnerData, ToBytes(owner_data))
      .Add(Tag::kPseudonym, ToBytes(name_))
      .Add(Tag::kTStart, EncodeTimestamp(now))
      .Add(Tag::kTStop, EncodeTimestamp(kForever));
  return Send(seller, conn, std::move(msg));
}

absl::StatusOr<Envelope> Owner::BeginUpload(const std::string& car,
                                            const std::string& car_id,
                                            const std::string& role,
                                            uint64_t conn, uint64_t now) {
  absl::StatusOr<RoleGroup*> g = EnsureGroup(role);
  if (!g.ok()) return g.status();
  Bytes nonce = rng_.Generate(kNonceSize);
  uploads_[conn] = Upload{car_id, role, nonce, std::nullopt};
  Message msg = Start(Procedure::kUploadGpk, 1);
  msg.Add(Tag::kNonceA, nonce)
      .Add(Tag::kPseudonym, ToBytes(name_))
      .Add(Tag::kCarId, ToBytes(car_id))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, msg);
  return Send(car, conn, std::move(msg));
}

void Owner::Approve(Approval approval) {
  approvals_.push_back(std::move(approval));
}

std::vector<Envelope> Owner::Receive(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!wire::Encode(m).ok()) return Fail(in, Reason::kMalformed, "", now);
  if (m.procedure == Procedure::kUploadGpk && m.step == 2) {
    return OnUploadStep2(in, now);
  }
  if (m.procedure == Procedure::kUploadGpk && m.step == 4) {
    return OnUploadStep4(in, now);
  }
  if (m.procedure == Procedure::kDelegate && m.step == 1) {
    return OnDelegateStep1(in, now);
  }
  if (m.procedure == Procedure::kDelegate && m.step == 3) {
    return OnDelegateStep3(in, now);
  }
  return Fail(in, Reason::kUnexpectedStep, "", now);
}

std::vector<Envelope> Owner::OnUploadStep2(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  auto it = uploads_.find(in.conn);
  if (it == uploads_.end() || it->second.step3) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  Upload& up = it->second;
  if (*m.Find(Tag::kNonceA) != up.nonce_own) {
    return Fail(in, Reason::kNonceMismatch, "", now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(up.car_id, m)) {
    return Fail(in, Reason::kBadSignature, "car challenge", now);
  }
  Message out = Start(Procedure::kUploadGpk, 3);
  out.Add(Tag::kNonceA, up.nonce_own)
      .Add(Tag::kNonceB, *m.Find(Tag::kNonceB))
      .Add(Tag::kRole, ToBytes(up.role))
      .Add(Tag::kGpk, groupsig::EncodePublicKey(groups_.at(up.role).group.gpk))
      .Add(Tag::kTStart, EncodeTimestamp(now))
      .Add(Tag::kTStop, EncodeTimestamp(kForever))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, out);
  up.step3 = out;
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> Owner::OnUploadStep4(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  auto it = uploads_.find(in.conn);
  if (it == uploads_.end() || !it->second.step3) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  const Upload& up = it->second;
  if (*FieldString(m, Tag::kAction) != kActConfirm ||
      *m.Find(Tag::kEmbedded) != wire::SignedPortion(*up.step3)) {
    return Fail(in, Reason::kNonceMismatch, "confirmation does not bind upload",
                now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(up.car_id, m)) {
    return Fail(in, Reason::kBadSignature, "car confirmation", now);
  }
  confirmed_.insert(up.role);
  uploads_.erase(it);
  return {};
}

std::vector<Envelope> Owner::OnDelegateStep1(const Envelope& in,
                                             uint64_t now) {
  const Message& m = in.msg;
  std::string user = *FieldString(m, Tag::kPseudonym);
  std::string role = *FieldString(m, Tag::kRole);
  const Bytes& kind_field = *m.Find(Tag::kDelegationKind);
  absl::StatusOr<policy::Attributes> attrs =
      policy::DecodeAttributes(*m.Find(Tag::kAttributes));
  std::optional<uint64_t> t_start = FieldTime(m, Tag::kTStart);
  std::optional<uint64_t> t_stop = FieldTime(m, Tag::kTStop);
  if (kind_field.size() != 1 || kind_field[0] < 1 || kind_field[0] > 2 ||
      !attrs.ok() || !t_start || !t_stop) {
    return Fail(in, Reason::kMalformed, "", now);
  }
  const auto kind = static_cast<DelegationKind>(kind_field[0]);
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(user, m)) {
    return Fail(in, Reason::kBadSignature, "delegation request", now);
  }
  const Bytes encoded_attrs = policy::EncodeAttributes(*attrs);
  auto approval = std::find_if(
      approvals_.begin(), approvals_.end(), [&](const Approval& a) {
        return a.pseudonym == user && a.role == role && a.kind == kind &&
               policy::EncodeAttributes(a.attributes) == encoded_attrs &&
               a.t_start == *t_start && a.t_stop == *t_stop;
      });
  if (approval == approvals_.end()) {
    return Fail(in, Reason::kNotApproved, absl::StrCat(user, " as ", role),
                now);
  }

  DelegationToken token;
  token.kind = kind;
  token.attributes = *attrs;
  if (kind == DelegationKind::kPersistent) {
    auto g = groups_.find(role);
    if (g == groups_.end()) {
      return Fail(in, Reason::kUnknownRole, "no group for role", now);
    }
    RoleGroup& rg = g->second;
    if (rg.next_member >= rg.group.members.size()) {
      return Fail(in, Reason::kUnknownRole, "role group exhausted", now);
    }
    token.gpk = rg.group.gpk;
    token.member = rg.group.members[rg.next_member++];
  } else {
    Claim claim{user, role, *attrs, *t_start, *t_stop, name_};
    Credential cred;
    cred.claim = EncodeClaim(claim);
    ++counters_.gs_sign;
    absl::StatusOr<Bytes> sig =
        groupsig::Sign(owner_gpk(), owner_member_, cred.claim, rng_);
    if (!sig.ok()) return Fail(in, Reason::kMalformed, "", now);
    cred.signature = *std::move(sig);
    issued_.push_back(cred);
    token.credential = std::move(cred);
  }

  ++counters_.kem_encap;
  absl::StatusOr<crypto::Encapsulation> enc =
      crypto::KemEncapsulate(*m.Find(Tag::kEphemeralKey), rng_);
  if (!enc.ok()) {
    return Fail(in, Reason::kMalformed, "user ephemeral key", now);
  }
  approvals_.erase(approval);

  Message out = Start(Procedure::kDelegate, 2);
  ibs::TruncatedSignature trunc = ibs::Truncate64(m.auth);
  out.Add(Tag::kNonceB, rng_.Generate(kNonceSize))
      .Add(Tag::kNonceA, *m.Find(Tag::kNonceA))
      .Add(Tag::kSealedToken, Seal(enc->shared, EncodeToken(token)))
      .Add(Tag::kTruncSig, Bytes(trunc.begin(), trunc.end()))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  if (!SignGroup(owner_gpk(), owner_member_, out).ok()) {
    return Fail(in, Reason::kMalformed, "", now);
  }
  delegations_[in.conn] = Delegation{user, role, wire::SignedPortion(m),
                                     *wire::Encode(out), enc->ciphertext};
  return {Reply(in, std::move(out))};
}

std::vector<Envelope> Owner::OnDelegateStep3(const Envelope& in,
                                             uint64_t now) {
  const Message& m = in.msg;
  auto it = delegations_.find(in.conn);
  if (it == delegations_.end()) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  const Delegation& d = it->second;
  crypto::Digest req = crypto::Hash(d.step1_portion);
  crypto::Digest resp = crypto::Hash(d.step2_encoded);
  if (*m.Find(Tag::kRequestDigest) != Bytes(req.begin(), req.end()) ||
      *m.Find(Tag::kResponseDigest) != Bytes(resp.begin(), resp.end())) {
    return Fail(in, Reason::kNonceMismatch, "receipt does not bind exchange",
                now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(d.pseudonym, m)) {
    return Fail(in, Reason::kBadSignature, "receipt", now);
  }
  receipts_[d.pseudonym].push_back(m);
  Message out = Start(Procedure::kDelegate, 4);
  out.Add(Tag::kKemCiphertext, d.kem_ciphertext);
  delegations_.erase(it);
  return {Reply(in, std::move(out))};
}

absl::StatusOr<uint32_t> Owner::Trace(const Message& execute_step1) {
  const Bytes* role = execute_step1.Find(Tag::kRole);
  if (role == nullptr) return absl::InvalidArgumentError("no role field");
  auto it = groups_.find(ToString(*role));
  if (it == groups_.end()) return absl::NotFoundError("no group for role");
  ++counters_.gs_trace;
  return groupsig::Trace(it->second.group.gpk, it->second.group.gmsk,
                         wire::SignedPortion(execute_step1),
                         execute_step1.auth);
}

RevocationRequest Owner::MakeRevocation(RevocationTarget kind, Bytes target,
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
