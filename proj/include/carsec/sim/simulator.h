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


// Deterministic discrete-tick network of protocol actors with a Dolev-Yao
// adversary.
//
// Each tick delivers at most one frame. Messages are split into chunks at
// the channel MTU. Frames on untrusted channels go to the adversary, which
// reassembles whole messages, applies the scenario strategy and sends the
// result on to the destination; frames on trusted channels bypass it.
// Actor clocks are epoch + tick / 10 + advanced seconds + the actor offset.

#ifndef CARSEC_SIM_SIMULATOR_H_
#define CARSEC_SIM_SIMULATOR_H_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "carsec/crypto/rng.h"
#include "carsec/protocol/actors.h"
#include "carsec/sim/knowledge.h"
#include "carsec/sim/scenario.h"

namespace carsec::sim {

inline constexpr uint64_t kEpoch = 1'700'000'000;
inline constexpr uint64_t kTicksPerSecond = 10;
// Connection numbers at or above this belong to the adversary.
inline constexpr uint64_t kAdversaryConnBase = uint64_t{1} << 32;

struct StepRecord {
  int line = 0;
  StepKind kind;
  // False when the initiator refused to start, e.g. no token or session.
  bool started = true;
  std::string note;
  // Operation counts during the step, over all actors and per actor.
  protocol::OpCounters ops;
  std::map<std::string, protocol::OpCounters> actor_ops;
  // Revoke steps: the car's answer.
  absl::Status revocation;
  // Wall time of the step; not part of the transcript.
  double elapsed_ms = 0;
};

// Requested by an honest user, or executed by a car.
struct ActionRecord {
  std::string car;
  std::string role;
  protocol::Command command;

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
  friend bool operator<(const ActionRecord& a, const ActionRecord& b) {
    return std::tie(a.car, a.role, a.command.object, a.command.action) <
           std::tie(b.car, b.role, b.command.object, b.command.action);
  }
};

struct Result {
  std::vector<std::string> transcript;
  std::vector<StepRecord> steps;
  // Safety violations; any entry means the adversary won.
  std::vector<std::string> violations;
  // The strategy found a matching message or, for leak-kses, a session.
  bool strategy_applied = false;

  bool attack_found() const { return !violations.empty(); }
  // Verdict against the scenario expectation.
  bool Passed(Expectation expect) const;
  std::string TranscriptText() const;
};

class Simulator {
 public:
  // Generates keys and actors. Fails on configuration errors.
  static absl::StatusOr<std::unique_ptr<Simulator>> Create(Scenario scenario);

  const Result& Run();
  const Result& result() const { return result_; }
  const Scenario& scenario() const { return scenario_; }

  // Final actor states; nullptr when `name` is not of that kind.
  const protocol::Car* car(const std::string& name) const;
  const protocol::User* user(const std::string& name) const;
  const protocol::Owner* owner(const std::string& name) const;
  const Knowledge& knowledge() const { return knowledge_; }
  const std::vector<ActionRecord>& requested() const { return requested_; }
  std::vector<ActionRecord> Executed() const;

 private:
  struct Frame {
    uint64_t ready;
    std::string from;
    std::string to;
    uint64_t conn;
    bool trusted;
    // Sent by the adversary: delivered without interception.
    bool forged;
    std::string label;  // "procedure/step" of the whole message
    Bytes bytes;
  };
  // Partially received message, keyed by (from, to, conn).
  using StreamKey = std::tuple<std::string, std::string, uint64_t>;

  explicit Simulator(Scenario scenario);
  absl::Status Init();

  ChannelSpec Channel(const std::string& a, const std::string& b) const;
  uint64_t Now(const std::string& actor) const;
  uint64_t NextConn() { return ++conn_; }

  void RunStep(const Step& step);
  // Starts a run and delivers frames until the network is quiet.
  void Start(const protocol::Envelope& first, bool forged = false);
  void Pump();
  void Enqueue(const std::string& from, const std::string& to, uint64_t conn,
               ByteSpan message, bool forged);
  void Deliver(const Frame& frame);
  void Intercept(const Frame& frame);
  void DeliverMessage(const std::string& from, const std::string& to,
                      uint64_t conn, bool trusted, ByteSpan bytes);

  // Adversary.
  std::vector<Bytes> Apply(const wire::Message& msg, const Bytes& bytes,
                           uint64_t conn);
  void OnAdversaryConn(const wire::Message& msg, uint64_t conn);
  void AfterExecute(const std::string& user, const std::string& car);

  void Log(std::string line);
  void LogNewEvents();
  void CheckSafety();

  Scenario scenario_;
  protocol::Deployment deployment_;
  crypto::DeterministicRng rng_;
  crypto::DeterministicRng adversary_rng_;
  std::map<std::string, std::unique_ptr<protocol::Actor>> actors_;
  std::map<std::string, ibs::UserKey> car_keys_;

  uint64_t tick_ = 0;
  uint64_t advanced_ = 0;
  std::map<std::string, int64_t> offsets_;
  uint64_t conn_ = 0;
  uint64_t adversary_conn_ = kAdversaryConnBase;
  std::deque<Frame> queue_;
  std::map<StreamKey, std::vector<wire::Chunk>> at_adversary_;
  std::map<StreamKey, std::vector<wire::Chunk>> at_destination_;

  Knowledge knowledge_;
  std::vector<protocol::Envelope> observed_;
  std::optional<Bytes> splice_first_;
  int strategy_hits_ = 0;
  bool leaked_ = false;
  // Hijack: car challenge seen per connection.
  std::map<uint64_t, wire::Message> challenges_;
  // Leak: forged OTF runs on adversary connections.
  struct ForgedRun {
    std::string user;
    std::string car;
    Bytes sid;
    Bytes kses;
  };
  std::map<uint64_t, ForgedRun> forged_;

  std::vector<ActionRecord> requested_;
  std::map<std::string, std::string> honest_owner_;  // car -> owner
  std::map<std::string, std::string> built_by_;  // car -> manufacturer
  // (user, car) -> role of the last Execute; OTF runs under it.
  std::map<std::pair<std::string, std::string>, std::string> session_role_;
  std::map<std::string, size_t> seen_aborts_;
  std::map<std::string, size_t> seen_executed_;
  size_t seen_revocations_ = 0;
  Result result_;
  bool ran_ = false;
};

// Variants of `base` with one strategy each: every field and the auth value
// of every step mutated, and every step dropped, replayed and spliced, for
// each procedure in `procedures`. The variants expect safety.
std::vector<Scenario> SafetyBattery(
    const Scenario& base, const std::vector<wire::Procedure>& procedures);

}  // namespace carsec::sim

#endif  // CARSEC_SIM_SIMULATOR_H_
