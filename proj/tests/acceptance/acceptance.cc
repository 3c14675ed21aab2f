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


// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero when any criterion fails. Every tolerance is a constant below.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "absl/strings/str_cat.h"
#include "carsec/bench/bench.h"
#include "carsec/crypto/big_num.h"
#include "carsec/crypto/rng.h"
#include "carsec/groupsig/groupsig.h"
#include "carsec/ibs/ibs.h"
#include "carsec/policy/policy.h"
#include "carsec/protocol/actors.h"
#include "carsec/sim/scenario.h"
#include "carsec/sim/simulator.h"
#include "carsec/wire/chunk.h"
#include "carsec/wire/message.h"

namespace carsec {
namespace {

using crypto::BigNum;
using crypto::DeterministicRng;
using wire::Procedure;

constexpr int kTrials = 1000;
constexpr int kTestBits = 512;
constexpr int kFullBits = 2048;
constexpr int kFullRoundTrips = 10;
constexpr double kIbsBudgetSeconds = 120.0;
constexpr uint32_t kGroupSizes[] = {1, 10, 32};
constexpr uint32_t kTamperGroupSize = 10;
constexpr int kMatrixAssertions = 306;
constexpr int kBenchIterations = bench::kMinIterations;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records the first failure only.
  void Require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string Shipped(const std::string& name) {
  std::ifstream in(std::string(CARSEC_SOURCE_DIR "/data/scenarios/") + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses and runs; nullptr on any error.
std::unique_ptr<sim::Simulator> Simulate(const sim::Scenario& sc) {
  absl::StatusOr<std::unique_ptr<sim::Simulator>> s =
      sim::Simulator::Create(sc);
  if (!s.ok()) return nullptr;
  (*s)->Run();
  return *std::move(s);
}

absl::StatusOr<sim::Scenario> Load(const std::string& name) {
  return sim::ParseScenario(Shipped(name));
}

Bytes FlipBit(Bytes b, DeterministicRng& rng) {
  size_t bit = rng.Uniform(b.size() * 8);
  b[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
  return b;
}

// Word-sized oracle: repeated multiplication and exhaustive inverse.
uint64_t OraclePow(uint64_t base, uint64_t exp, uint64_t n) {
  uint64_t acc = 1 % n;
  for (uint64_t i = 0; i < exp; ++i) acc = acc * (base % n) % n;
  return acc;
}

uint64_t OracleInverse(uint64_t a, uint64_t m) {
  for (uint64_t x = 1; x < m; ++x) {
    if (a * x % m == 1) return x;
  }
  return 0;
}

uint64_t U64(const BigNum& x) { return x.ToU64().value_or(~uint64_t{0}); }

// 1. Randomized round trips and single-bit mutations.
Outcome IbsCorrectness() {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  int round_trips = 0, rejected = 0, full = 0;
  for (ibs::Scheme scheme : {ibs::Scheme::kShamir, ibs::Scheme::kGq}) {
    const std::string name = ibs::SchemeName(scheme);
    DeterministicRng rng(0xa1 + static_cast<int>(scheme));
    absl::StatusOr<ibs::MasterKey> msk =
        ibs::Setup({scheme, kTestBits, std::nullopt}, rng);
    if (!msk.ok()) {
      out.Require(false, name + " setup: " + msk.status().ToString());
      return out;
    }
    std::vector<ibs::UserKey> keys;
    for (int i = 0; i < 16; ++i) {
      keys.push_back(*ibs::KeyDer(*msk, ToBytes(absl::StrCat("user-", i))));
    }
    for (int i = 0; i < kTrials; ++i) {
      const ibs::UserKey& key = keys[rng.Uniform(keys.size())];
      Bytes msg = rng.Generate(1 + rng.Uniform(64));
      Bytes sig = ibs::EncodeSignature(msk->params, ibs::Sign(key, msg, rng));
      bool ok = ibs::VerifyEncoded(msk->params, key.identity, msg, sig);
      out.Require(ok, name + " round trip failed");
      round_trips += ok;
      bool in_msg = rng.Uniform(2) == 0;
      bool accepted =
          in_msg ? ibs::VerifyEncoded(msk->params, key.identity,
                                      FlipBit(msg, rng), sig)
                 : ibs::VerifyEncoded(msk->params, key.identity, msg,
                                      FlipBit(sig, rng));
      out.Require(!accepted, name + " accepted a mutated pair");
      rejected += !accepted;
    }
    absl::StatusOr<ibs::MasterKey> big =
        ibs::Setup({scheme, kFullBits, std::nullopt}, rng);
    if (!big.ok()) {
      out.Require(false, name + " 2048 setup: " + big.status().ToString());
      return out;
    }
    ibs::UserKey key = *ibs::KeyDer(*big, ToBytes("driver"));
    for (int i = 0; i < kFullRoundTrips; ++i) {
      Bytes msg = rng.Generate(32);
      bool ok = ibs::Verify(big->params, key.identity, msg,
                            ibs::Sign(key, msg, rng));
      out.Require(ok, name + " 2048-bit round trip failed");
      full += ok;
    }
  }
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  out.Require(secs < kIbsBudgetSeconds, absl::StrCat("took ", secs, " s"));
  if (out.pass) {
    out.detail = absl::StrCat(round_trips, "/", 2 * kTrials,
                              " round trips at ", kTestBits, " bits, ", full,
                              "/", 2 * kFullRoundTrips, " at ", kFullBits,
                              ", ", rejected, "/", 2 * kTrials,
                              " mutations rejected, ",
                              static_cast<int>(secs), " s");
  }
  return out;
}

// 2. Every operation over tiny moduli against the word oracle.
Outcome TinyPrimeOracle() {
  Outcome out;
  struct Case {
    uint64_t p, q, e;
  };
  constexpr Case kCases[] = {{5, 11, 3}, {7, 13, 5}, {11, 17, 3}};
  int checks = 0;
  auto eq = [&](uint64_t got, uint64_t want, const std::string& what) {
    out.Require(got == want, absl::StrCat(what, ": got ", got, " want ",
                                          want));
    ++checks;
  };
  for (const Case& c : kCases) {
    const uint64_t n = c.p * c.q;
    const uint64_t phi = (c.p - 1) * (c.q - 1);
    const uint64_t d = OracleInverse(c.e, phi);
    for (ibs::Scheme scheme : {ibs::Scheme::kShamir, ibs::Scheme::kGq}) {
      const std::string tag =
          absl::StrCat(ibs::SchemeName(scheme), " n=", n);
      DeterministicRng rng(n);
      absl::StatusOr<ibs::MasterKey> msk = ibs::SetupFromPrimes(
          scheme, BigNum(c.p), BigNum(c.q), BigNum(c.e), rng);
      if (!msk.ok()) {
        out.Require(false, tag + " setup failed");
        continue;
      }
      eq(U64(msk->params.n), n, tag + " modulus");
      eq(U64(msk->params.exponent), c.e, tag + " exponent");
      eq(U64(msk->secret_exponent), d, tag + " secret exponent");
      for (uint64_t j = 2; j < n; ++j) {
        if (std::gcd(j, n) != 1) continue;
        absl::StatusOr<ibs::UserKey> key =
            ibs::KeyDerForElement(*msk, ToBytes("id"), BigNum(j));
        if (!key.ok()) {
          out.Require(false, tag + " keyder failed");
          continue;
        }
        const uint64_t want = scheme == ibs::Scheme::kShamir
                                  ? OraclePow(j, d, n)
                                  : OraclePow(OracleInverse(j, n), d, n);
        const uint64_t secret = U64(key->secret);
        eq(secret, want, absl::StrCat(tag, " key for J=", j));
        for (uint64_t r = 2; r < n; r += 7) {
          if (std::gcd(r, n) != 1) continue;
          const Bytes msg = {static_cast<uint8_t>(j), static_cast<uint8_t>(r)};
          ibs::Signature sig = ibs::SignWithCommitment(*key, msg, BigNum(r));
          const uint64_t t = OraclePow(r, c.e, n);
          const std::string at = absl::StrCat(tag, " J=", j, " r=", r);
          if (scheme == ibs::Scheme::kShamir) {
            uint64_t h = U64(ibs::MessageExponent(key->params, BigNum(t), msg));
            eq(U64(sig.second), t, at + " t");
            eq(U64(sig.first), secret * OraclePow(r, h, n) % n, at + " s");
            eq(OraclePow(U64(sig.first), c.e, n), j * OraclePow(t, h, n) % n,
               at + " verify equation");
          } else {
            uint64_t h = U64(ibs::MessageExponent(key->params, BigNum(), msg));
            uint64_t big_d = OraclePow(j, h, n) * OraclePow(t, c.e, n) % n;
            eq(U64(sig.first), big_d, at + " d");
            eq(U64(sig.second), r * OraclePow(secret, big_d, n) % n,
               at + " t");
            eq(OraclePow(j, big_d, n) * OraclePow(U64(sig.second), c.e, n) % n,
               t, at + " recomputed T");
          }
          bool ok = ibs::VerifyForElement(key->params, BigNum(j), msg, sig);
          out.Require(ok, at + " verify rejected");
          ++checks;
        }
      }
    }
  }
  // The worked example: d = 27 mod 40, 4^27 mod 55 = 49, 49^3 = 4.
  DeterministicRng rng(1);
  absl::StatusOr<ibs::MasterKey> msk = ibs::SetupFromPrimes(
      ibs::Scheme::kShamir, BigNum(5), BigNum(11), BigNum(3), rng);
  if (msk.ok()) {
    eq(U64(msk->secret_exponent), 27, "worked example d");
    absl::StatusOr<ibs::UserKey> key =
        ibs::KeyDerForElement(*msk, ToBytes("alice"), BigNum(4));
    eq(key.ok() ? U64(key->secret) : 0, 49, "worked example secret");
    eq(OraclePow(49, 3, 55), 4, "worked example check");
  } else {
    out.Require(false, "worked example setup failed");
  }
  if (out.pass) out.detail = absl::StrCat(checks, " exact comparisons");
  return out;
}

// 3. GQ commitment recomputation, the vacuous closing check and tampering.
Outcome GqLedger() {
  Outcome out;
  DeterministicRng rng(0x63);
  absl::StatusOr<ibs::MasterKey> msk =
      ibs::Setup({ibs::Scheme::kGq, kTestBits, std::nullopt}, rng);
  if (!msk.ok()) {
    out.Require(false, "setup failed");
    return out;
  }
  const ibs::PublicParams& pp = msk->params;
  ibs::UserKey key = *ibs::KeyDer(*msk, ToBytes("driver"));
  const BigNum& j = key.identity_element;
  int honest = 0, vacuous = 0, rejected = 0;
  for (int i = 0; i < kTrials; ++i) {
    BigNum r = crypto::RandomUnit(pp.n, rng);
    Bytes msg = rng.Generate(1 + rng.Uniform(40));
    ibs::Signature sig = ibs::SignWithCommitment(key, msg, r);
    bool same = ibs::gq::RecomputeCommitment(pp, j, sig) ==
                r.ModExp(pp.exponent, pp.n);
    out.Require(same, "recomputed T differs from the signer's");
    honest += same;

    // Arbitrary (d, t): d' is J^c * T'^v, and d'' always equals it.
    ibs::Signature junk{crypto::RandomUnit(pp.n, rng),
                        crypto::RandomUnit(pp.n, rng)};
    BigNum c = ibs::MessageExponent(pp, BigNum(), msg);
    BigNum t_prime = ibs::gq::RecomputeCommitment(pp, j, junk);
    BigNum d_prime =
        j.ModExp(c, pp.n).ModMul(t_prime.ModExp(pp.exponent, pp.n), pp.n);
    bool closes = d_prime == ibs::gq::ClosingValue(pp, j, c, junk);
    out.Require(closes, "d' != d'' on an arbitrary pair");
    vacuous += closes;

    ibs::Signature bad = sig;
    switch (i % 3) {
      case 0:
        bad.first = bad.first.ModAdd(BigNum(1 + rng.Uniform(1000)), pp.n);
        break;
      case 1:
        bad.second = crypto::RandomUnit(pp.n, rng);
        break;
      default:
        bad = junk;
        break;
    }
    bool accepted = ibs::VerifyForElement(pp, j, msg, bad);
    out.Require(!accepted, "tampered signature accepted");
    rejected += !accepted;
  }
  if (out.pass) {
    out.detail = absl::StrCat("T'=T ", honest, "/", kTrials, ", d'=d'' ",
                              vacuous, "/", kTrials,
                              " arbitrary pairs, d=d' rejected ", rejected,
                              "/", kTrials, " tampered");
  }
  return out;
}

// 4. Group signatures on both backends.
Outcome GroupSuite() {
  Outcome out;
  int signatures = 0, traced = 0, tampered = 0;
  for (groupsig::Backend backend :
       {groupsig::Backend::kReference, groupsig::Backend::kRing}) {
    const std::string name = groupsig::BackendName(backend);
    DeterministicRng rng(0x65 + static_cast<int>(backend));
    for (uint32_t n : kGroupSizes) {
      const std::string tag = absl::StrCat(name, " n=", n);
      absl::StatusOr<groupsig::Group> g = groupsig::Generate(backend, n, rng);
      absl::StatusOr<groupsig::Group> other =
          groupsig::Generate(backend, n, rng);
      if (!g.ok() || !other.ok()) {
        out.Require(false, tag + " generate failed");
        continue;
      }
      out.Require(g->members.size() == n, tag + " member count");
      for (const groupsig::GroupMemberKey& m : g->members) {
        Bytes msg = rng.Generate(24);
        absl::StatusOr<Bytes> sig = groupsig::Sign(g->gpk, m, msg, rng);
        if (!sig.ok()) {
          out.Require(false, tag + " sign failed");
          continue;
        }
        bool ok = groupsig::Verify(g->gpk, msg, *sig);
        out.Require(ok, absl::StrCat(tag, " member ", m.index, " rejected"));
        signatures += ok;
        absl::StatusOr<uint32_t> who =
            groupsig::Trace(g->gpk, g->gmsk, msg, *sig);
        bool exact = who.ok() && *who == m.index;
        out.Require(exact, absl::StrCat(tag, " trace of ", m.index));
        traced += exact;
        out.Require(!groupsig::Verify(other->gpk, msg, *sig),
                    tag + " verified under another group");
        absl::StatusOr<Bytes> foreign = groupsig::Sign(
            g->gpk, other->members[m.index - 1], msg, rng);
        out.Require(!foreign.ok() || !groupsig::Verify(g->gpk, msg, *foreign),
                    tag + " foreign member accepted");
      }
    }
    absl::StatusOr<groupsig::Group> g =
        groupsig::Generate(backend, kTamperGroupSize, rng);
    if (!g.ok()) {
      out.Require(false, name + " generate failed");
      continue;
    }
    for (int i = 0; i < kTrials; ++i) {
      const groupsig::GroupMemberKey& m =
          g->members[rng.Uniform(g->members.size())];
      Bytes msg = rng.Generate(1 + rng.Uniform(40));
      Bytes sig = *groupsig::Sign(g->gpk, m, msg, rng);
      bool accepted = rng.Uniform(2) == 0
                          ? groupsig::Verify(g->gpk, FlipBit(msg, rng), sig)
                          : groupsig::Verify(g->gpk, msg, FlipBit(sig, rng));
      out.Require(!accepted, name + " accepted a tampered signature");
      tampered += !accepted;
    }
  }
  if (out.pass) {
    out.detail = absl::StrCat(signatures, " member signatures verified, ",
                              traced, " traced exactly, ", tampered, "/",
                              2 * kTrials, " tampered rejected");
  }
  return out;
}

// 5. The rights table, transcribed cell by cell. Columns: Owner, Driver,
// Technician, Child occupant, Valet, Passenger.
Outcome RightsMatrix() {
  Outcome out;
  struct Row {
    const char* object;
    const char* cells[6];
  };
  constexpr const char* kRoles[6] = {"Owner",         "Driver", "Technician",
                                     "ChildOccupant", "Valet",  "Passenger"};
  constexpr Row kRows[17] = {
      {"Start Engine", {"---", "--e", "--e", "---", "--e", "---"}},
      {"Open Trunk", {"--e", "--e", "--e", "---", "---", "--e"}},
      {"Open Doors", {"--e", "--e", "--e", "--e", "--e", "--e"}},
      {"Limit speed", {"rw-", "rw-", "---", "---", "---", "---"}},
      {"Fuel Level", {"r--", "r--", "r--", "---", "r--", "---"}},
      {"Diagnosis", {"--e", "--e", "--e", "---", "---", "---"}},
      {"SW Update", {"---", "---", "--e", "---", "---", "---"}},
      {"Park car", {"---", "--e", "--e", "---", "--e", "---"}},
      {"Home", {"--e", "--e", "--e", "---", "---", "---"}},
      {"Alarm", {"--e", "--e", "--e", "---", "--e", "---"}},
      {"Start A/C", {"--e", "--e", "--e", "---", "--e", "--e"}},
      {"Defrost", {"--e", "--e", "--e", "---", "--e", "---"}},
      {"Mirrors", {"--e", "--e", "--e", "---", "--e", "---"}},
      {"Lights", {"--e", "--e", "--e", "---", "--e", "---"}},
      {"Play music", {"--e", "--e", "--e", "--e", "--e", "--e"}},
      {"Limit volume", {"rw-", "rw-", "rw-", "---", "---", "---"}},
      {"Trip Computer", {"rw-", "rw-", "r--", "---", "---", "---"}},
  };
  constexpr policy::Action kActions[3] = {
      policy::Action::kRead, policy::Action::kWrite, policy::Action::kExecute};
  absl::StatusOr<policy::PermissionTable> t =
      policy::PermissionTable::Load(policy::DefaultPolicyDocument());
  if (!t.ok()) {
    out.Require(false, "table failed to load");
    return out;
  }
  out.Require(t->roles().size() == 6 && t->objects().size() == 17,
              "table shape is not 6 x 17");
  int assertions = 0;
  for (const Row& row : kRows) {
    for (int r = 0; r < 6; ++r) {
      for (int a = 0; a < 3; ++a) {
        bool want = row.cells[r][a] != '-';
        bool got =
            t->Check(kRoles[r], row.object, kActions[a], {}, 0).allowed;
        out.Require(got == want, absl::StrCat(kRoles[r], " / ", row.object,
                                              " / ", std::string(1, "rwe"[a])));
        ++assertions;
      }
      out.Require(t->Rights(kRoles[r], row.object).Render() == row.cells[r],
                  absl::StrCat(kRoles[r], " / ", row.object, " rendering"));
    }
  }
  out.Require(assertions == kMatrixAssertions,
              absl::StrCat(assertions, " assertions"));
  if (out.pass) out.detail = absl::StrCat(assertions, " cells match");
  return out;
}

// 6. The scripted honest run.
Outcome HappyPath() {
  Outcome out;
  absl::StatusOr<sim::Scenario> sc = Load("happy-path.scn");
  std::unique_ptr<sim::Simulator> s = sc.ok() ? Simulate(*sc) : nullptr;
  if (s == nullptr) {
    out.Require(false, "scenario did not load or run");
    return out;
  }
  const protocol::Car* car = s->car("car");
  const auto& ex = car->executed();
  out.Require(ex.size() == 2, absl::StrCat(ex.size(), " actions executed"));
  if (ex.size() == 2) {
    out.Require(ex[0].procedure == Procedure::kExecute &&
                    ex[0].command.object == "Start Engine",
                "first action is not Execute / Start Engine");
    out.Require(ex[1].procedure == Procedure::kExecuteOtf &&
                    ex[1].command.object == "Open Doors",
                "second action is not OTF / Open Doors");
  }
  out.Require(car->sessions_established() == 1,
              absl::StrCat(car->sessions_established(), " sessions"));
  const sim::StepRecord& otf = s->result().steps.back();
  out.Require(otf.kind == sim::StepKind::kOtf && otf.started,
              "last step is not a started OTF");
  out.Require(otf.ops.Asymmetric() == 0,
              absl::StrCat(otf.ops.Asymmetric(), " asymmetric ops in OTF"));
  out.Require(!s->result().attack_found(), "safety violation reported");
  if (out.pass) {
    out.detail = "Start Engine then Open Doors, 1 session, 0 asymmetric "
                 "ops in OTF";
  }
  return out;
}

// 7. Mutation, replay, drop and splice over Execute and Execute-OTF.
Outcome SafetySweep() {
  Outcome out;
  absl::StatusOr<sim::Scenario> base = Load("battery-base.scn");
  if (!base.ok()) {
    out.Require(false, "base scenario did not parse");
    return out;
  }
  const std::vector<Procedure> procs = {Procedure::kExecute,
                                        Procedure::kExecuteOtf};
  std::vector<sim::Scenario> battery = sim::SafetyBattery(*base, procs);
  // Every field of every step mutated at least once, auth included.
  std::set<std::tuple<Procedure, int, int>> wanted, covered;
  for (Procedure p : procs) {
    for (int step = 1; step <= wire::StepCount(p); ++step) {
      for (const wire::Schema& sc : wire::SchemasFor(p, step)) {
        for (wire::Tag tag : sc.fields) {
          wanted.insert({p, step, static_cast<int>(tag)});
        }
        if (sc.auth != wire::AuthKind::kNone) wanted.insert({p, step, 0});
      }
    }
  }
  int requested_open = 0;
  for (const sim::Step& st : base->steps) {
    if (st.kind == sim::StepKind::kExecute || st.kind == sim::StepKind::kOtf) {
      out.Require(st.command.object == "Open Doors",
                  "base run requests something other than open");
      ++requested_open;
    }
  }
  int applied = 0;
  for (const sim::Scenario& v : battery) {
    const std::string name = sim::RenderStrategy(v.strategy);
    if (v.strategy.kind == sim::StrategyKind::kMutate) {
      covered.insert({v.strategy.procedure, v.strategy.step,
                      v.strategy.field ? static_cast<int>(*v.strategy.field)
                                       : 0});
    }
    std::unique_ptr<sim::Simulator> s = Simulate(v);
    if (s == nullptr) {
      out.Require(false, name + " did not run");
      continue;
    }
    out.Require(s->result().strategy_applied, name + " never applied");
    applied += s->result().strategy_applied;
    for (const protocol::ExecutedAction& e : s->car("car")->executed()) {
      out.Require(e.command.object != "Start Engine",
                  name + " executed Start Engine");
      out.Require(e.command.object == "Open Doors",
                  name + " executed " + e.command.object);
    }
    // Covers policy-denied and unrequested executions.
    out.Require(!s->result().attack_found(),
                name + ": " + (s->result().violations.empty()
                                   ? std::string()
                                   : s->result().violations.front()));
  }
  out.Require(covered == wanted,
              absl::StrCat(covered.size(), " of ", wanted.size(),
                           " fields mutated"));
  if (out.pass) {
    out.detail = absl::StrCat(battery.size(), " variants, ", applied,
                              " applied, ", covered.size(),
                              " fields and auth values mutated, all safe");
  }
  return out;
}

// 8. The leaked session key yields an accepted forged OTF.
Outcome AttackRealizability() {
  Outcome out;
  absl::StatusOr<sim::Scenario> sc = Load("leak-kses.scn");
  std::unique_ptr<sim::Simulator> s = sc.ok() ? Simulate(*sc) : nullptr;
  if (s == nullptr) {
    out.Require(false, "scenario did not load or run");
    return out;
  }
  out.Require(s->result().strategy_applied, "leak never applied");
  out.Require(s->result().attack_found(), "no violation found");
  bool started = false;
  for (const protocol::ExecutedAction& e : s->car("car")->executed()) {
    started |= e.procedure == Procedure::kExecuteOtf &&
               e.command.object == "Start Engine";
  }
  out.Require(started, "forged OTF Start Engine not executed");
  if (out.pass) {
    out.detail = "forged OTF accepted, car executed Start Engine: " +
                 s->result().violations.front();
  }
  return out;
}

// 9. A dropped key release leaves the user with nothing; honest tokens of
// both kinds execute.
Outcome DelegationFairness() {
  Outcome out;
  absl::StatusOr<sim::Scenario> sc = Load("drop-delegate-step4.scn");
  std::unique_ptr<sim::Simulator> s = sc.ok() ? Simulate(*sc) : nullptr;
  if (s == nullptr) {
    out.Require(false, "drop scenario did not load or run");
    return out;
  }
  out.Require(s->result().strategy_applied, "drop never applied");
  out.Require(s->user("alice")->token("Driver") == nullptr,
              "user holds a token");
  out.Require(s->car("car")->executed().empty(), "car executed for the user");
  const auto& receipts = s->owner("PsO")->receipts();
  out.Require(receipts.contains("alice") && receipts.at("alice").size() == 1,
              "owner holds no step-3 receipt");

  absl::StatusOr<sim::Scenario> honest = Load("battery-base.scn");
  std::unique_ptr<sim::Simulator> h = honest.ok() ? Simulate(*honest) : nullptr;
  if (h == nullptr) {
    out.Require(false, "honest scenario did not load or run");
    return out;
  }
  const protocol::DelegationToken* p = h->user("alice")->token("Driver");
  const protocol::DelegationToken* e = h->user("bob")->token("Driver");
  out.Require(p != nullptr && p->kind == protocol::DelegationKind::kPersistent,
              "no persistent token");
  out.Require(e != nullptr && e->kind == protocol::DelegationKind::kEphemeral,
              "no ephemeral token");
  // Each request, bob's ephemeral Execute included, ran exactly once.
  std::vector<sim::ActionRecord> done = h->Executed();
  std::vector<sim::ActionRecord> asked = h->requested();
  std::sort(done.begin(), done.end());
  std::sort(asked.begin(), asked.end());
  out.Require(done == asked, "honest executions differ from requests");
  if (out.pass) {
    out.detail = absl::StrCat(
        "drop: no token, owner holds 1 receipt; honest: persistent and "
        "ephemeral executed, ",
        h->car("car")->executed().size(), " actions");
  }
  return out;
}

// 10. Revoked token and pseudonym denied at Execute step 1.
Outcome Revocation() {
  Outcome out;
  absl::StatusOr<sim::Scenario> sc = Load("revocation.scn");
  std::unique_ptr<sim::Simulator> s = sc.ok() ? Simulate(*sc) : nullptr;
  if (s == nullptr) {
    out.Require(false, "scenario did not load or run");
    return out;
  }
  std::vector<const sim::StepRecord*> revokes;
  for (const sim::StepRecord& r : s->result().steps) {
    if (r.kind == sim::StepKind::kRevoke) revokes.push_back(&r);
  }
  out.Require(revokes.size() == 3, "expected three revocations");
  if (revokes.size() == 3) {
    out.Require(!revokes[0]->revocation.ok(),
                "unauthorized revoker accepted");
    out.Require(revokes[1]->revocation.ok() && revokes[2]->revocation.ok(),
                "owner revocation rejected");
  }
  const protocol::DelegationToken* bob = s->user("bob")->token("Driver");
  out.Require(bob != nullptr &&
                  bob->kind == protocol::DelegationKind::kEphemeral,
              "bob holds no ephemeral token");
  int denied = 0;
  for (const protocol::Abort& a : s->car("car")->aborts()) {
    if (a.reason != protocol::Reason::kRevoked) continue;
    out.Require(a.procedure == Procedure::kExecute && a.step == 1,
                "revocation enforced after step 1");
    ++denied;
  }
  out.Require(denied == 2, absl::StrCat(denied, " revoked denials"));
  // bob before his revocation, alice after both.
  out.Require(s->car("car")->executed().size() == 2,
              "unexpected executions");
  out.Require(!s->result().attack_found(), "safety violation reported");
  if (out.pass) {
    out.detail = "token and pseudonym denied at execute/1, unauthorized "
                 "revoker rejected";
  }
  return out;
}

const bench::Row* FindRow(const std::vector<bench::Row>& rows,
                          const std::string& family, const std::string& op) {
  for (const bench::Row& r : rows) {
    if (r.family == family && r.operation == op) return &r;
  }
  return nullptr;
}

// 11. Ordinal claims on this host.
Outcome Benchmarks() {
  Outcome out;
  bench::Options o;
  o.iterations = kBenchIterations;
  absl::StatusOr<std::vector<bench::Row>> prim = bench::RunPrimitives(o);
  absl::StatusOr<std::vector<bench::Row>> proc = bench::RunProcedures(o);
  if (!prim.ok() || !proc.ok()) {
    out.Require(false, "benchmark failed");
    return out;
  }
  auto pair = [&](const std::string& family) {
    const bench::Row* s = FindRow(*prim, family, "sign");
    const bench::Row* v = FindRow(*prim, family, "verify");
    out.Require(s && v && s->iterations >= bench::kMinIterations &&
                    v->iterations >= bench::kMinIterations,
                family + " rows missing");
    return s && v ? s->mean_ms + v->mean_ms : 0.0;
  };
  const std::string bits = absl::StrCat(kFullBits);
  double shamir = pair("ibs-shamir-" + bits);
  double gq = pair("ibs-gq-" + bits);
  out.Require(shamir < gq, absl::StrCat("Shamir ", shamir, " ms >= GQ ", gq,
                                        " ms"));
  std::string procs;
  for (const char* scheme : {"shamir", "gq"}) {
    const std::string family = absl::StrCat("procedure-", scheme, "-", bits);
    const bench::Row* otf = FindRow(*proc, family, "execute-otf");
    const bench::Row* ex = FindRow(*proc, family, "execute-persistent");
    if (otf == nullptr || ex == nullptr) {
      out.Require(false, family + " rows missing");
      continue;
    }
    out.Require(otf->iterations >= bench::kMinIterations &&
                    ex->iterations >= bench::kMinIterations,
                family + " too few iterations");
    out.Require(otf->mean_ms < ex->mean_ms,
                absl::StrCat(family, " OTF ", otf->mean_ms,
                             " ms >= Execute ", ex->mean_ms, " ms"));
    absl::StrAppend(&procs, ", ", scheme, " OTF ", otf->mean_ms,
                    " < Execute ", ex->mean_ms);
  }
  if (out.pass) {
    out.detail = absl::StrCat("sign+verify Shamir ", shamir, " < GQ ", gq,
                              " ms", procs, " ms, ", kBenchIterations,
                              " iterations");
  }
  return out;
}

wire::Message RandomLegalMessage(DeterministicRng& rng) {
  auto proc = static_cast<Procedure>(1 + rng.Uniform(wire::kProcedureCount));
  int step = 1 + static_cast<int>(rng.Uniform(wire::StepCount(proc)));
  const std::vector<wire::Schema>& schemas = wire::SchemasFor(proc, step);
  const wire::Schema& schema = schemas[rng.Uniform(schemas.size())];
  wire::Message m{proc, static_cast<uint8_t>(step), {}, schema.auth, {}};
  for (wire::Tag tag : schema.fields) {
    m.Add(tag, rng.Generate(rng.Uniform(300)));
  }
  if (schema.auth != wire::AuthKind::kNone) {
    m.auth = rng.Generate(1 + rng.Uniform(200));
  }
  return m;
}

// 12. Codec and chunking identities.
Outcome WireDeterminism() {
  Outcome out;
  DeterministicRng rng(0x77);
  int identical = 0;
  for (int i = 0; i < kTrials; ++i) {
    wire::Message m = RandomLegalMessage(rng);
    absl::StatusOr<Bytes> enc = wire::Encode(m);
    absl::StatusOr<wire::Message> dec =
        enc.ok() ? wire::Decode(*enc) : absl::StatusOr<wire::Message>(
                                            enc.status());
    bool same = dec.ok() && *dec == m && *wire::Encode(*dec) == *enc;
    out.Require(same, "decode(encode(m)) != m");
    identical += same;
    if (!enc.ok()) continue;
    absl::StatusOr<std::vector<wire::Chunk>> chunks = wire::Split(*enc);
    if (!chunks.ok()) {
      out.Require(false, "split failed");
      continue;
    }
    for (const wire::Chunk& c : *chunks) {
      out.Require(wire::EncodeChunk(c).size() <= wire::kDefaultMtu,
                  "frame exceeds the MTU");
    }
    absl::StatusOr<Bytes> back = wire::Reassemble(*chunks);
    out.Require(back.ok() && *back == *enc, "reassembly differs");
  }
  Bytes big = rng.Generate(600);
  absl::StatusOr<std::vector<wire::Chunk>> chunks = wire::Split(big);
  out.Require(chunks.ok() && chunks->size() == 3,
              "600 bytes is not three chunks");
  if (chunks.ok() && chunks->size() == 3) {
    std::vector<wire::Chunk> shuffled = {(*chunks)[2], (*chunks)[0],
                                         (*chunks)[1]};
    absl::StatusOr<Bytes> back = wire::Reassemble(shuffled);
    out.Require(back.ok() && *back == big, "600-byte reassembly differs");
    for (size_t drop = 0; drop < 3; ++drop) {
      std::vector<wire::Chunk> missing;
      for (size_t k = 0; k < 3; ++k) {
        if (k != drop) missing.push_back((*chunks)[k]);
      }
      out.Require(!wire::Reassemble(missing).ok(),
                  absl::StrCat("missing chunk ", drop, " reassembled"));
    }
  }
  if (out.pass) {
    out.detail = absl::StrCat(identical, "/", kTrials,
                              " messages round-trip, 600 bytes = 3 chunks, "
                              "missing chunk rejected");
  }
  return out;
}

// 13. Equal seed and scenario, equal transcript bytes.
Outcome SimulatorDeterminism() {
  Outcome out;
  int files = 0;
  for (const char* name : {"happy-path.scn", "battery-base.scn",
                           "leak-kses.scn", "hijack.scn", "revocation.scn"}) {
    absl::StatusOr<sim::Scenario> sc = Load(name);
    std::unique_ptr<sim::Simulator> a = sc.ok() ? Simulate(*sc) : nullptr;
    std::unique_ptr<sim::Simulator> b = sc.ok() ? Simulate(*sc) : nullptr;
    if (a == nullptr || b == nullptr) {
      out.Require(false, std::string(name) + " did not run");
      continue;
    }
    out.Require(a->result().TranscriptText() == b->result().TranscriptText(),
                std::string(name) + " transcripts differ");
    ++files;
  }
  if (out.pass) {
    out.detail = absl::StrCat(files, " scenarios byte-identical across runs");
  }
  return out;
}

}  // namespace
}  // namespace carsec

int main() {
  using Check = std::function<carsec::Outcome()>;
  const Check checks[] = {
      carsec::IbsCorrectness,
      carsec::TinyPrimeOracle,
      carsec::GqLedger,
      carsec::GroupSuite,
      carsec::RightsMatrix,
      carsec::HappyPath,
      carsec::SafetySweep,
      carsec::AttackRealizability,
      carsec::DelegationFairness,
      carsec::Revocation,
      carsec::Benchmarks,
      carsec::WireDeterminism,
      carsec::SimulatorDeterminism,
  };
  int failed = 0;
  for (size_t i = 0; i < std::size(checks); ++i) {
    carsec::Outcome o = checks[i]();
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL")
              << " " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
