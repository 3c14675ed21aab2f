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


#include "carsec/protocol/common.h"

#include <array>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "carsec/wire/tlv.h"

namespace carsec::protocol {
namespace {

enum : uint8_t {
  kClaimPseudonym = 1,
  kClaimRole = 2,
  kClaimAttributes = 3,
  kClaimStart = 4,
  kClaimStop = 5,
  kClaimDelegator = 6,
};

enum : uint8_t { kCredClaim = 1, kCredSignature = 2 };

enum : uint8_t {
  kTokenGpk = 1,
  kTokenMember = 2,
  kTokenAttributes = 3,
  kTokenCredential = 4,
};

enum : uint8_t {
  kRevAuthority = 1,
  kRevKind = 2,
  kRevTarget = 3,
  kRevCredential = 4,
  kRevTimestamp = 5,
};

constexpr std::array<const char*, kReasonCount> kReasonNames = {
    "none",
    "malformed",
    "untrusted-channel",
    "already-initialized",
    "not-initialized",
    "bad-signature",
    "wrong-car",
    "wrong-peer",
    "owner-already-set",
    "no-owner",
    "not-root",
    "nonce-mismatch",
    "replay",
    "stale-timestamp",
    "unknown-role",
    "group-signature",
    "credential",
    "expired",
    "revoked",
    "policy-deny",
    "truncation-mismatch",
    "mac-failure",
    "decrypt-failure",
    "unknown-session",
    "session-expired",
    "unexpected-step",
    "not-approved",
    "unauthorized",
};

// Records must appear exactly in `tags` order.
absl::StatusOr<wire::TlvReader> ParseExact(ByteSpan bytes,
                                           std::initializer_list<uint8_t> tags,
                                           const char* what) {
  absl::StatusOr<wire::TlvReader> r = wire::TlvReader::Parse(bytes);
  if (!r.ok()) return r.status();
  const auto& recs = r->records();
  if (recs.size() != tags.size()) {
    return absl::InvalidArgumentError(absl::StrCat("malformed ", what));
  }
  size_t i = 0;
  for (uint8_t t : tags) {
    if (recs[i++].tag != t) {
      return absl::InvalidArgumentError(absl::StrCat("malformed ", what));
    }
  }
  return r;
}

}  // namespace

std::string ReasonName(Reason reason) {
  const size_t i = static_cast<size_t>(reason);
  return i < kReasonNames.size() ? kReasonNames[i] : "unknown";
}

uint64_t OpCounters::Asymmetric() const {
  return ibs_sign + ibs_verify + gs_sign + gs_verify + gs_trace + kem_keygen +
         kem_encap + kem_decap;
}

OpCounters OpCounters::operator-(const OpCounters& e) const {
  OpCounters d;
  d.ibs_sign = ibs_sign - e.ibs_sign;
  d.ibs_verify = ibs_verify - e.ibs_verify;
  d.gs_sign = gs_sign - e.gs_sign;
  d.gs_verify = gs_verify - e.gs_verify;
  d.gs_trace = gs_trace - e.gs_trace;
  d.kem_keygen = kem_keygen - e.kem_keygen;
  d.kem_encap = kem_encap - e.kem_encap;
  d.kem_decap = kem_decap - e.kem_decap;
  d.mac = mac - e.mac;
  d.sym = sym - e.sym;
  return d;
}

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  ibs_sign += o.ibs_sign;
  ibs_verify += o.ibs_verify;
  gs_sign += o.gs_sign;
  gs_verify += o.gs_verify;
  gs_trace += o.gs_trace;
  kem_keygen += o.kem_keygen;
  kem_encap += o.kem_encap;
  kem_decap += o.kem_decap;
  mac += o.mac;
  sym += o.sym;
  return *this;
}

absl::StatusOr<crypto::KemKeyPair> GenerateKem(const Deployment& deployment,
                                               crypto::Rng& rng) {
  if (deployment.kem == crypto::KemKind::kRsa) {
    return crypto::KemKeyPair::GenerateRsa(deployment.kem_rsa_bits, rng);
  }
  return crypto::KemKeyPair::GenerateDh(deployment.kem_curve, rng);
}

Bytes EncodeTimestamp(uint64_t seconds) {
  Bytes out;
  AppendUint(out, seconds, 8);
  return out;
}

absl::StatusOr<uint64_t> DecodeTimestamp(ByteSpan value) {
  if (value.size() != 8) return absl::InvalidArgumentError("bad timestamp");
  return ReadUint(value, 0, 8);
}

bool Fresh(uint64_t ts, uint64_t now) {
  return ts <= now ? now - ts <= kMaxSkewSeconds : ts - now <= kMaxSkewSeconds;
}

std::string DelegationKindName(DelegationKind kind) {
  return kind == DelegationKind::kPersistent ? "persistent" : "ephemeral";
}

absl::StatusOr<DelegationKind> ParseDelegationKind(const std::string& name) {
  if (name == "persistent") return DelegationKind::kPersistent;
  if (name == "ephemeral") return DelegationKind::kEphemeral;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown delegation kind: ", name));
}

Bytes EncodeCommand(const Command& command) {
  Bytes out;
  out.push_back(static_cast<uint8_t>(policy::ActionChar(command.action)));
  Append(out, ToBytes(command.object));
  return out;
}

absl::StatusOr<Command> DecodeCommand(ByteSpan bytes) {
  if (bytes.size() < 2) return absl::InvalidArgumentError("short command");
  absl::StatusOr<policy::Action> action =
      policy::ParseAction(static_cast<char>(bytes[0]));
  if (!action.ok()) return action.status();
  return Command{ToString(bytes.subspan(1)), *action};
}

std::string RenderCommand(const Command& command) {
  return absl::StrCat(command.object, ":",
                      std::string(1, policy::ActionChar(command.action)));
}

Bytes EncodeClaim(const Claim& claim) {
  wire::TlvWriter w;
  w.AddString(kClaimPseudonym, claim.pseudonym)
      .AddString(kClaimRole, claim.role)
      .Add(kClaimAttributes, policy::EncodeAttributes(claim.attributes))
      .AddU64(kClaimStart, claim.t_start)
      .AddU64(kClaimStop, claim.t_stop)
      .AddString(kClaimDelegator, claim.delegator);
  return std::move(w).Finish();
}

absl::StatusOr<Claim> DecodeClaim(ByteSpan bytes) {
  absl::StatusOr<wire::TlvReader> r = ParseExact(
      bytes,
      {kClaimPseudonym, kClaimRole, kClaimAttributes, kClaimStart, kClaimStop,
       kClaimDelegator},
      "claim");
  if (!r.ok()) return r.status();
  Claim c;
  c.pseudonym = *r->GetString(kClaimPseudonym);
  c.role = *r->GetString(kClaimRole);
  absl::StatusOr<policy::Attributes> attrs =
      policy::DecodeAttributes(*r->Get(kClaimAttributes));
  if (!attrs.ok()) return attrs.status();
  c.attributes = *std::move(attrs);
  absl::StatusOr<uint64_t> start = r->GetU64(kClaimStart);
  absl::StatusOr<uint64_t> stop = r->GetU64(kClaimStop);
  if (!start.ok()) return start.status();
  if (!stop.ok()) return stop.status();
  c.t_start = *start;
  c.t_stop = *stop;
  c.delegator = *r->GetString(kClaimDelegator);
  return c;
}

Bytes EncodeCredential(const Credential& credential) {
  wire::TlvWriter w;
  w.Add(kCredClaim, credential.claim).Add(kCredSignature, credential.signature);
  return std::move(w).Finish();
}

absl::StatusOr<Credential> DecodeCredential(ByteSpan bytes) {
  absl::StatusOr<wire::TlvReader> r =
      ParseExact(bytes, {kCredClaim, kCredSignature}, "credential");
  if (!r.ok()) return r.status();
  return Credential{*r->Get(kCredClaim), *r->Get(kCredSignature)};
}

crypto::Digest TokenDigest(const Credential& credential) {
  return crypto::Hash({credential.claim, credential.signature});
}

Bytes EncodeToken(const DelegationToken& token) {
  wire::TlvWriter w;
  if (token.kind == DelegationKind::kPersistent) {
    w.Add(kTokenGpk, groupsig::EncodePublicKey(*token.gpk))
        .Add(kTokenMember, groupsig::EncodeMemberKey(*token.member));
  } else {
    w.Add(kTokenCredential, EncodeCredential(*token.credential));
  }
  w.Add(kTokenAttributes, policy::EncodeAttributes(token.attributes));
  Bytes out = {static_cast<uint8_t>(token.kind)};
  Append(out, w.bytes());
  return out;
}

absl::StatusOr<DelegationToken> DecodeToken(ByteSpan bytes,
                                            groupsig::Backend backend) {
  if (bytes.empty() || bytes[0] < 1 || bytes[0] > 2) {
    return absl::InvalidArgumentError("malformed token");
  }
  DelegationToken t;
  t.kind = static_cast<DelegationKind>(bytes[0]);
  const bool persistent = t.kind == DelegationKind::kPersistent;
  absl::StatusOr<wire::TlvReader> r =
      persistent ? ParseExact(bytes.subspan(1),
                              {kTokenGpk, kTokenMember, kTokenAttributes},
                              "token")
                 : ParseExact(bytes.subspan(1),
                              {kTokenCredential, kTokenAttributes}, "token");
  if (!r.ok()) return r.status();
  if (persistent) {
    absl::StatusOr<groupsig::GroupPublicKey> gpk =
        groupsig::DecodePublicKey(*r->Get(kTokenGpk), backend);
    if (!gpk.ok()) return gpk.status();
    absl::StatusOr<groupsig::GroupMemberKey> member =
        groupsig::DecodeMemberKey(*r->Get(kTokenMember), backend);
    if (!member.ok()) return member.status();
    t.gpk = *std::move(gpk);
    t.member = *std::move(member);
  } else {
    absl::StatusOr<Credential> cred =
        DecodeCredential(*r->Get(kTokenCredential));
    if (!cred.ok()) return cred.status();
    t.credential = *std::move(cred);
  }
  absl::StatusOr<policy::Attributes> attrs =
      policy::DecodeAttributes(*r->Get(kTokenAttributes));
  if (!attrs.ok()) return attrs.status();
  t.attributes = *std::move(attrs);
  return t;
}

Bytes RevocationSignedBytes(const RevocationRequest& request) {
  wire::TlvWriter w;
  w.AddString(kRevAuthority, request.authority)
      .AddU64(kRevKind, static_cast<uint8_t>(request.kind))
      .Add(kRevTarget, request.target);
  if (request.credential) {
    w.Add(kRevCredential, EncodeCredential(*request.credential));
  }
  w.AddU64(kRevTimestamp, request.timestamp);
  Bytes out = ToBytes("revocation");
  Append(out, w.bytes());
  return out;
}

RevocationRequest SignRevocation(RevocationRequest request,
                                 const ibs::UserKey& key, crypto::Rng& rng) {
  ibs::Signature sig = ibs::Sign(key, RevocationSignedBytes(request), rng);
  request.signature = ibs::EncodeSignature(key.params, sig);
  return request;
}

bool RevocationList::IsRevoked(RevocationTarget kind, ByteSpan target,
                               uint64_t now) const {
  for (const RevocationEntry& e : entries_) {
    if (e.kind == kind && e.revoked_at <= now &&
        Bytes(target.begin(), target.end()) == e.target) {
      return true;
    }
  }
  return false;
}

}  // namespace carsec::protocol
