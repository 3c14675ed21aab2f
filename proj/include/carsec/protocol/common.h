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


// Types shared by every protocol actor: abort reasons, operation counters,
// timestamps, commands, delegation credentials and revocation requests.

#ifndef CARSEC_PROTOCOL_COMMON_H_
#define CARSEC_PROTOCOL_COMMON_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/ec.h"
#include "carsec/crypto/key_agreement.h"
#include "carsec/crypto/symmetric.h"
#include "carsec/groupsig/groupsig.h"
#include "carsec/ibs/ibs.h"
#include "carsec/policy/policy.h"
#include "carsec/wire/message.h"

namespace carsec::protocol {

inline constexpr size_t kNonceSize = 16;
inline constexpr size_t kSessionIdSize = 8;
inline constexpr uint64_t kMaxSkewSeconds = 120;
// Encoded as eight 0xff bytes.
inline constexpr uint64_t kForever = policy::kForever;
inline constexpr uint64_t kDefaultSessionLifetime = 24 * 3600;

// Action labels carried in the kAction field.
inline constexpr char kActInstallSeller[] = "inst-sel";
inline constexpr char kActConfirm[] = "conf";

enum class Reason : uint8_t {
  kNone = 0,
  kMalformed,
  kUntrustedChannel,
  kAlreadyInitialized,
  kNotInitialized,
  kBadSignature,
  kWrongCar,
  kWrongPeer,
  kOwnerAlreadySet,
  kNoOwner,
  kNotRoot,
  kNonceMismatch,
  kReplay,
  kStaleTimestamp,
  kUnknownRole,
  kGroupSignature,
  kCredential,
  kExpired,
  kRevoked,
  kPolicyDeny,
  kTruncationMismatch,
  kMacFailure,
  kDecryptFailure,
  kUnknownSession,
  kSessionExpired,
  kUnexpectedStep,
  kNotApproved,
  kUnauthorized,
};
inline constexpr int kReasonCount = static_cast<int>(Reason::kUnauthorized) + 1;

// Stable kebab-case name, e.g. "policy-deny".
std::string ReasonName(Reason reason);

// Public-key operations are everything except MAC and symmetric sealing.
struct OpCounters {
  uint64_t ibs_sign = 0;
  uint64_t ibs_verify = 0;
  uint64_t gs_sign = 0;
  uint64_t gs_verify = 0;
  uint64_t gs_trace = 0;
  uint64_t kem_keygen = 0;
  uint64_t kem_encap = 0;
  uint64_t kem_decap = 0;
  uint64_t mac = 0;
  uint64_t sym = 0;

  uint64_t Asymmetric() const;
  OpCounters operator-(const OpCounters& earlier) const;
  OpCounters& operator+=(const OpCounters& other);
};

// Parameters every actor agrees on before any procedure runs.
struct Deployment {
  ibs::PublicParams ibs;
  groupsig::Backend backend = groupsig::Backend::kReference;
  crypto::KemKind kem = crypto::KemKind::kDh;
  crypto::Curve kem_curve = crypto::Curve::kP256;
  int kem_rsa_bits = 1024;
  // Member keys per role group generated by the owner.
  uint32_t group_size = 8;
  uint64_t session_lifetime = kDefaultSessionLifetime;
};

absl::StatusOr<crypto::KemKeyPair> GenerateKem(const Deployment& deployment,
                                               crypto::Rng& rng);

// Eight bytes big-endian.
Bytes EncodeTimestamp(uint64_t seconds);
absl::StatusOr<uint64_t> DecodeTimestamp(ByteSpan value);
// |ts - now| <= kMaxSkewSeconds.
bool Fresh(uint64_t ts, uint64_t now);

enum class DelegationKind : uint8_t {
  kPersistent = 1,
  kEphemeral = 2,
};
std::string DelegationKindName(DelegationKind kind);
absl::StatusOr<DelegationKind> ParseDelegationKind(const std::string& name);

// The requested action on a vehicle object, sealed under Kses.
struct Command {
  std::string object;
  policy::Action action = policy::Action::kExecute;

  friend bool operator==(const Command&, const Command&) = default;
};
// [action char][object name].
Bytes EncodeCommand(const Command& command);
absl::StatusOr<Command> DecodeCommand(ByteSpan bytes);
std::string RenderCommand(const Command& command);

// The tuple an ephemeral credential signs. `delegator` names the pseudonym
// that issued it and is the only non-root identity allowed to revoke it.
struct Claim {
  std::string pseudonym;
  std::string role;
  policy::Attributes attributes;
  uint64_t t_start = 0;
  uint64_t t_stop = kForever;
  std::string delegator;
};
Bytes EncodeClaim(const Claim& claim);
absl::StatusOr<Claim> DecodeClaim(ByteSpan bytes);

// Owner's group signature over an encoded claim.
struct Credential {
  Bytes claim;
  Bytes signature;

  friend bool operator==(const Credential&, const Credential&) = default;
};
Bytes EncodeCredential(const Credential& credential);
absl::StatusOr<Credential> DecodeCredential(ByteSpan bytes);
// SHA-256(claim || signature); the revocation handle of an ephemeral token.
crypto::Digest TokenDigest(const Credential& credential);

// What Delegate step 2 seals under Kses: a role member key together with
// the role public key (persistent), or a credential (ephemeral).
struct DelegationToken {
  DelegationKind kind = DelegationKind::kPersistent;
  std::optional<groupsig::GroupPublicKey> gpk;
  std::optional<groupsig::GroupMemberKey> member;
  std::optional<Credential> credential;
  policy::Attributes attributes;
};
// [kind u8] || TLV body.
Bytes EncodeToken(const DelegationToken& token);
absl::StatusOr<DelegationToken> DecodeToken(ByteSpan bytes,
                                            groupsig::Backend backend);

enum class RevocationTarget : uint8_t {
  kPseudonym = 1,
  kTokenDigest = 2,
};

// Signed by `authority` with its identity key. A non-root authority must
// attach the credential it issued for the target.
struct RevocationRequest {
  std::string authority;
  RevocationTarget kind = RevocationTarget::kPseudonym;
  Bytes target;
  std::optional<Credential> credential;
  uint64_t timestamp = 0;
  Bytes signature;
};
// Everything except the signature.
Bytes RevocationSignedBytes(const RevocationRequest& request);
RevocationRequest SignRevocation(RevocationRequest request,
                                 const ibs::UserKey& key, crypto::Rng& rng);

struct RevocationEntry {
  RevocationTarget kind;
  Bytes target;
  uint64_t revoked_at;
  std::string authority;
};

// Append-only.
class RevocationList {
 public:
  void Append(RevocationEntry entry) { entries_.push_back(std::move(entry)); }
  bool IsRevoked(RevocationTarget kind, ByteSpan target, uint64_t now) const;
  const std::vector<RevocationEntry>& entries() const { return entries_; }

 private:
  std::vector<RevocationEntry> entries_;
};

}  // namespace carsec::protocol

#endif  // CARSEC_PROTOCOL_COMMON_H_
