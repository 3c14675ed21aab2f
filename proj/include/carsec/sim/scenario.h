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


// Scenario files. Line-oriented; '#' starts a comment; tokens are separated
// by blanks and may be double-quoted. Errors carry "line:column: message".
//
//   seed N
//   ibs shamir|gq BITS
//   groupsig reference|ring
//   kem dh|rsa
//   group-size N               member keys per role group
//   manufacturer NAME | seller NAME | owner NAME | user NAME
//   car NAME VIN
//   channel A B [mtu N] [trusted] [latency TICKS]
//   default-channel [mtu N] [trusted] [latency TICKS]
//   strategy passive
//   strategy drop|replay|splice PROC STEP
//   strategy mutate PROC STEP FIELD|auth
//   strategy leak-kses|hijack [OBJECT [ACTION]]
//   expect safe|attack
//
// Steps, run in order:
//   setup MAN CAR
//   set-root SEL OWNER CAR
//   upload OWNER CAR ROLE
//   delegate OWNER USER ROLE persistent|ephemeral [for SECONDS] [attrs LIST]
//   execute USER CAR ROLE OBJECT [ACTION]
//   otf USER CAR OBJECT [ACTION]
//   advance SECONDS
//   revoke AUTHORITY CAR pseudonym|token USER
//   clock ACTOR OFFSET
//
// OBJECT is an object name from the car policy, or one of the aliases
// "open" (Open Doors) and "start" (Start Engine). ACTION is r, w or e and
// defaults to e. mtu 0 means unbounded.

#ifndef CARSEC_SIM_SCENARIO_H_
#define CARSEC_SIM_SCENARIO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/key_agreement.h"
#include "carsec/groupsig/groupsig.h"
#include "carsec/ibs/ibs.h"
#include "carsec/policy/policy.h"
#include "carsec/protocol/common.h"
#include "carsec/wire/chunk.h"
#include "carsec/wire/message.h"

namespace carsec::sim {

enum class ActorKind { kManufacturer, kSeller, kOwner, kCar, kUser };
std::string ActorKindName(ActorKind kind);

struct ActorDecl {
  ActorKind kind;
  std::string name;
  std::string vin;  // cars only
  int line = 0;
};

struct ChannelSpec {
  size_t mtu = wire::kDefaultMtu;  // 0: unbounded
  bool trusted = false;
  uint64_t latency = 0;  // ticks
};

// Undirected.
struct ChannelDecl {
  std::string a;
  std::string b;
  ChannelSpec spec;
  int line = 0;
  int col_a = 1;
  int col_b = 1;
};

enum class StrategyKind {
  kPassive,
  kDrop,
  kReplay,
  kSplice,
  kMutate,
  kLeakKses,
  kHijack,
};

struct Strategy {
  StrategyKind kind = StrategyKind::kPassive;
  wire::Procedure procedure = wire::Procedure::kExecute;
  int step = 1;
  // kMutate: the field to flip; nullopt targets the auth value.
  std::optional<wire::Tag> field;
  // kLeakKses, kHijack: what the adversary makes the car do.
  protocol::Command command{"Start Engine", policy::Action::kExecute};
};
// One line of scenario syntax, without the "strategy " keyword.
std::string RenderStrategy(const Strategy& strategy);

enum class StepKind {
  kSetup,
  kSetRoot,
  kUpload,
  kDelegate,
  kExecute,
  kOtf,
  kAdvance,
  kRevoke,
  kClock,
};
std::string StepKindName(StepKind kind);

struct Step {
  StepKind kind;
  int line = 0;
  // Actor operands in grammar order, with their columns.
  std::vector<std::string> actors;
  std::vector<int> actor_cols;
  std::string role;
  protocol::Command command;
  protocol::DelegationKind delegation = protocol::DelegationKind::kPersistent;
  // kDelegate: validity in seconds from now; 0 means unbounded.
  uint64_t duration = 0;
  policy::Attributes attributes;
  // kAdvance: seconds; kClock: signed offset.
  int64_t seconds = 0;
  protocol::RevocationTarget target = protocol::RevocationTarget::kPseudonym;
};

enum class Expectation { kSafe, kAttack };

struct Scenario {
  uint64_t seed = 1;
  ibs::Scheme scheme = ibs::Scheme::kShamir;
  int modulus_bits = ibs::kTestModulusBits;
  groupsig::Backend backend = groupsig::Backend::kReference;
  crypto::KemKind kem = crypto::KemKind::kDh;
  uint32_t group_size = 8;
  std::vector<ActorDecl> actors;
  std::vector<ChannelDecl> channels;
  ChannelSpec default_channel;
  Strategy strategy;
  Expectation expect = Expectation::kSafe;
  std::vector<Step> steps;

  const ActorDecl* Find(const std::string& name) const;
};

absl::StatusOr<Scenario> ParseScenario(std::string_view text);

// Every step operand names a declared actor of the right kind, and every
// channel endpoint is declared. Errors carry the step's line.
absl::Status Validate(const Scenario& scenario);

}  // namespace carsec::sim

#endif  // CARSEC_SIM_SCENARIO_H_
