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


// Protocol actors. Each actor is a message-driven state machine: an
// initiator method produces the first message of a run, and Receive
// consumes one inbound message and returns the messages it sends in reply.
// A run is identified by a connection number chosen by the caller; replies
// travel on the connection they answer.
//
// Every failed check is recorded as an Abort with a typed reason and
// produces no outbound message.

#ifndef CARSEC_PROTOCOL_ACTORS_H_
#define CARSEC_PROTOCOL_ACTORS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "carsec/crypto/key_agreement.h"
#include "carsec/crypto/rng.h"
#include "carsec/crypto/symmetric.h"
#include "carsec/groupsig/groupsig.h"
#include "carsec/ibs/ibs.h"
#include "carsec/policy/policy.h"
#include "carsec/protocol/common.h"
#include "carsec/wire/message.h"

namespace carsec::protocol {

struct Envelope {
  std::string from;
  std::string to;
  uint64_t conn = 0;
  // Set by the transport: the frame crossed a channel marked trusted.
  bool trusted = false;
  wire::Message msg;
};

struct Abort {
  wire::Procedure procedure;
  int step;
  Reason reason;
  std::string detail;
  uint64_t conn;
  uint64_t time;
};

class Actor {
 public:
  Actor(std::string name, const Deployment& deployment, uint64_t seed);
  virtual ~Actor() = default;
  Actor(const Actor&) = delete;
  Actor& operator=(const Actor&) = delete;

  const std::string& name() const { return name_; }
  const OpCounters& counters() const { return counters_; }
  const std::vector<Abort>& aborts() const { return aborts_; }

  virtual std::vector<Envelope> Receive(const Envelope& in, uint64_t now) = 0;
  // A frame that arrived for this actor but did not decode.
  void NoteMalformed(uint64_t conn, uint64_t now, std::string detail);

 protected:
  std::vector<Envelope> Fail(const Envelope& in, Reason reason,
                             std::string detail, uint64_t now);
  Envelope Reply(const Envelope& in, wire::Message msg) const;
  Envelope Send(const std::string& to, uint64_t conn,
                wire::Message msg) const;

  // Sets msg.auth over SignedPortion(msg).
  void SignIbs(const ibs::UserKey& key, wire::Message& msg);
  bool VerifyIbs(const std::string& identity, const wire::Message& msg);
  absl::Status SignGroup(const groupsig::GroupPublicKey& gpk,
                         const groupsig::GroupMemberKey& member,
                         wire::Message& msg);
  bool VerifyGroup(const groupsig::GroupPublicKey& gpk, ByteSpan msg,
                   ByteSpan sig);
  void SignMac(const crypto::SymmetricKey& key, wire::Message& msg);
  bool VerifyMac(const crypto::SymmetricKey& key, const wire::Message& msg);
  Bytes Seal(const crypto::SymmetricKey& key, ByteSpan plaintext);
  absl::StatusOr<Bytes> Open(const crypto::SymmetricKey& key, ByteSpan sealed);

  // Message with the header set and auth empty.
  static wire::Message Start(wire::Procedure procedure, int step);
  // Required field; nullopt when absent.
  static std::optional<std::string> FieldString(const wire::Message& msg,
                                                wire::Tag tag);
  static std::optional<uint64_t> FieldTime(const wire::Message& msg,
                                           wire::Tag tag);
  // Timestamp field present and within the skew bound.
  static bool TimestampFresh(const wire::Message& msg, uint64_t now);

  std::string name_;
  Deployment deployment_;
  crypto::DeterministicRng rng_;
  OpCounters counters_;
  std::vector<Abort> aborts_;
};

// Generates the car's identity key and installs the car with Setup; vouches
// for sellers in SetRoot.
class Manufacturer : public Actor {
 public:
  Manufacturer(std::string name, const Deployment& deployment, uint64_t seed,
               ibs::UserKey key);

  struct CarBundle {
    std::string car_id;
    ibs::UserKey car_key;
    std::string policy_document;
  };
  Envelope BeginSetup(const std::string& car, uint64_t conn,
                      const CarBundle& bundle, uint64_t now);

  std::vector<Envelope> Receive(const Envelope& in, uint64_t now) override;

 private:
  ibs::UserKey key_;
  std::set<std::string> built_;
};

class Seller : public Actor {
 public:
  Seller(std::string name, const Deployment& deployment, uint64_t seed,
         ibs::UserKey key);

  // Step 1 to the manufacturer. `car` is the actor that later receives
  // step 4 on the same connection.
  Envelope BeginSetRoot(const std::string& manufacturer,
                        const std::string& car, const std::string& car_id,
                        uint64_t conn, uint64_t now);

  std::vector<Envelope> Receive(const Envelope& in, uint64_t now) override;

 private:
  struct Sale {
    std::string manufacturer;
    std::string car;
    std::string car_id;
    std::optional<wire::Message> installation;
  };
  ibs::UserKey key_;
  std::map<uint64_t, Sale> sales_;
};

// The root. Holds every role group it generates, including the Owner
// group whose member key signs delegation replies and credentials.
class Owner : public Actor {
 public:
  Owner(std::string pseudonym, const Deployment& deployment, uint64_t seed,
        ibs::UserKey key, std::string root_role);

  const std::string& pseudonym() const { return name_; }
  const std::string& root_role() const { return root_role_; }
  const groupsig::GroupPublicKey& owner_gpk() const;

  // SetRoot step 3 to the seller.
  Envelope BeginSetRoot(const std::string& seller, uint64_t conn,
                        const std::string& owner_data, uint64_t now);
  // UploadGpk step 1. Generates the role group on first use.
  absl::StatusOr<Envelope> BeginUpload(const std::string& car,
                                       const std::string& car_id,
                                       const std::string& role, uint64_t conn,
                                       uint64_t now);

  // Pre-authorizes one delegation request. Without a matching approval
  // Delegate step 1 aborts with kNotApproved.
  struct Approval {
    std::string pseudonym;
    std::string role;
    DelegationKind kind;
    policy::Attributes attributes;
    uint64_t t_start = 0;
    uint64_t t_stop = kForever;
  };
  void Approve(Approval approval);

  std::vector<Envelope> Receive(const Envelope& in, uint64_t now) override;

  bool HasGroup(const std::string& role) const;
  const groupsig::GroupPublicKey* GroupKey(const std::string& role) const;
  // Full group state, manager key included.
  const groupsig::Group* group(const std::string& role) const;
  // Roles the car confirmed in UploadGpk step 4.
  const std::set<std::string>& confirmed_uploads() const {
    return confirmed_;
  }
  // Step-3 messages received per delegate pseudonym, in order.
  const std::map<std::string, std::vector<wire::Message>>& receipts() const {
    return receipts_;
  }
  // Credentials issued, in order.
  const std::vector<Credential>& issued() const { return issued_; }

  // Member index behind a group-signed Execute step 1.
  absl::StatusOr<uint32_t> Trace(const wire::Message& execute_step1);

  RevocationRequest MakeRevocation(RevocationTarget kind, Bytes target,
                                   std::optional<Credential> credential,
                                   uint64_t now);

 private:
  struct RoleGroup {
    groupsig::Group group;
    uint32_t next_member = 0;
  };
  struct Upload {
    std::string car_id;
    std::string role;
    Bytes nonce_own;
    std::optional<wire::Message> step3;
  };
  struct Delegation {
    std::string pseudonym;
    std::string role;
    Bytes step1_portion;
    Bytes step2_encoded;
    Bytes kem_ciphertext;
  };

  absl::StatusOr<RoleGroup*> EnsureGroup(const std::string& role);
  std::vector<Envelope> OnUploadStep2(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnUploadStep4(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnDelegateStep1(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnDelegateStep3(const Envelope& in, uint64_t now);

  ibs::UserKey key_;
  std::string root_role_;
  std::map<std::string, RoleGroup> groups_;
  groupsig::GroupMemberKey owner_member_;
  std::map<uint64_t, Upload> uploads_;
  std::vector<Approval> approvals_;
  std::map<uint64_t, Delegation> delegations_;
  std::map<std::string, std::vector<wire::Message>> receipts_;
  std::vector<Credential> issued_;
  std::set<std::string> confirmed_;
};

// A delegated user, persistent or ephemeral per role.
class User : public Actor {
 public:
  User(std::string pseudonym, const Deployment& deployment, uint64_t seed,
       ibs::UserKey key);

  const std::string& pseudonym() const { return name_; }
  // Out-of-band: the Owner-group public key that signs delegation replies.
  void TrustOwnerGroup(groupsig::GroupPublicKey gpk) {
    owner_gpk_ = std::move(gpk);
  }

  absl::StatusOr<Envelope> BeginDelegate(const std::string& owner,
                                         const std::string& role,
                                         DelegationKind kind,
                                         const policy::Attributes& attributes,
                                         uint64_t t_start, uint64_t t_stop,
                                         uint64_t conn, uint64_t now);
  absl::StatusOr<Envelope> BeginExecute(const std::string& car,
                                        const std::string& car_id,
                                        const std::string& role,
                                        const Command& command, uint64_t conn,
                                        uint64_t now);
  // Uses the session from the last Execute with `car`.
  absl::StatusOr<Envelope> BeginOtf(const std::string& car,
                                    const Command& command, uint64_t conn,
                                    uint64_t now);

  std::vector<Envelope> Receive(const Envelope& in, uint64_t now) override;

  // Decrypted token for `role`, if delegation completed.
  const DelegationToken* token(const std::string& role) const;
  const std::map<std::string, DelegationToken>& tokens() const {
    return tokens_;
  }
  // Sealed tokens received in Delegate step 2 that were never opened.
  size_t sealed_pending() const;

  struct Session {
    Bytes sid;
    crypto::SymmetricKey kses;
  };
  const Session* session(const std::string& car) const;

  // Signed with the user's identity key; authorized at the car only for
  // credentials this user issued.
  RevocationRequest MakeRevocation(RevocationTarget kind, Bytes target,
                                   std::optional<Credential> credential,
                                   uint64_t now);

 private:
  struct PendingDelegation {
    std::string owner;
    std::string role;
    DelegationKind kind;
    policy::Attributes attributes;
    crypto::KemKeyPair kem;
    Bytes step1_portion;
    Bytes s_usr;
    Bytes nonce_usr;
    std::optional<Bytes> sealed_token;
  };
  struct PendingExecute {
    std::string car;
    std::string car_id;
    Command command;
    Bytes nonce_usr;
    Bytes s_usr;
  };
  struct PendingOtf {
    std::string car;
    Bytes tag;
  };

  std::vector<Envelope> OnDelegateStep2(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnDelegateStep4(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnExecuteStep2(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnOtfStep2(const Envelope& in, uint64_t now);

  ibs::UserKey key_;
  std::optional<groupsig::GroupPublicKey> owner_gpk_;
  std::map<uint64_t, PendingDelegation> delegations_;
  std::map<std::string, DelegationToken> tokens_;
  std::map<uint64_t, PendingExecute> executes_;
  std::map<uint64_t, PendingOtf> otfs_;
  std::map<std::string, Session> sessions_;
};

// One executed action, as logged by the car. Carries no member identity.
struct ExecutedAction {
  wire::Procedure procedure;
  Bytes sid;
  std::string role;
  Command command;
  policy::Attributes attributes;
  uint64_t time;
};

struct SessionState {
  Bytes sid;
  crypto::SymmetricKey kses;
  std::string role;
  policy::Attributes attributes;
  uint64_t established_at;
  uint64_t lifetime;
};

class Car : public Actor {
 public:
  Car(std::string name, const Deployment& deployment, uint64_t seed);

  std::vector<Envelope> Receive(const Envelope& in, uint64_t now) override;

  // Authorized for the root pseudonym, and for the delegator named in an
  // attached credential that matches the target.
  absl::Status Revoke(const RevocationRequest& request, uint64_t now);

  bool initialized() const { return initialized_; }
  const std::string& car_id() const { return car_id_; }
  const std::optional<std::string>& owner() const { return owner_; }
  const std::optional<std::string>& seller() const { return seller_; }
  const policy::PermissionTable& policy() const { return policy_; }
  struct RoleKey {
    groupsig::GroupPublicKey gpk;
    uint64_t t_start;
    uint64_t t_stop;
  };
  const std::map<std::string, RoleKey>& role_keys() const {
    return role_keys_;
  }
  const std::vector<ExecutedAction>& executed() const { return executed_; }
  const std::map<Bytes, SessionState>& sessions() const { return sessions_; }
  // Sessions ever established by Execute step 3.
  uint64_t sessions_established() const { return sessions_established_; }
  const RevocationList& revocations() const { return revocations_; }

 private:
  struct PendingUpload {
    Bytes nonce_own;
  };
  struct PendingExecute {
    crypto::KemKeyPair kem;
    std::string role;
    policy::Attributes attributes;
    ibs::TruncatedSignature s_car;
  };
  struct PendingOtf {
    Command command;
    Bytes s_car;
  };

  std::vector<Envelope> OnSetup(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnSetRoot(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnUploadStep1(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnUploadStep3(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnExecuteStep1(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnExecuteStep3(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnOtfStep1(const Envelope& in, uint64_t now);
  std::vector<Envelope> OnOtfStep3(const Envelope& in, uint64_t now);
  Bytes FreshSessionId();
  // Owner-group key; signs ephemeral credentials.
  const RoleKey* RootKey() const;

  bool initialized_ = false;
  std::string manufacturer_;
  std::string car_id_;
  std::optional<ibs::UserKey> key_;
  policy::PermissionTable policy_;
  std::optional<std::string> owner_;
  uint64_t owner_t_start_ = 0;
  std::optional<std::string> seller_;
  std::map<std::string, RoleKey> role_keys_;
  std::map<Bytes, PendingUpload> uploads_;
  // Step-1 nonces seen within the skew window.
  std::map<Bytes, uint64_t> seen_nonces_;
  std::map<Bytes, PendingExecute> executes_;
  std::map<Bytes, SessionState> sessions_;
  std::map<Bytes, PendingOtf> otfs_;
  std::vector<ExecutedAction> executed_;
  uint64_t sessions_established_ = 0;
  RevocationList revocations_;
};

}  // namespace carsec::protocol

#endif  // CARSEC_PROTOCOL_ACTORS_H_
