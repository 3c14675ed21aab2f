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


#include "carsec/bench/bench.h"

#include <chrono>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "carsec/crypto/key_agreement.h"
#include "carsec/crypto/rng.h"
#include "carsec/groupsig/groupsig.h"
#include "carsec/ibs/ibs.h"
#include "carsec/sim/simulator.h"

namespace carsec::bench {
namespace {

using crypto::DeterministicRng;

absl::Status AddIbs(ibs::Scheme scheme, int bits, const Options& o,
                    DeterministicRng& rng, std::vector<Row>& rows) {
  ibs::SetupOptions opt;
  opt.scheme = scheme;
  opt.modulus_bits = bits;
  absl::StatusOr<ibs::MasterKey> msk = ibs::Setup(opt, rng);
  if (!msk.ok()) return msk.status();
  const Bytes id = ToBytes("bench-user");
  absl::StatusOr<ibs::UserKey> key = ibs::KeyDer(*msk, id);
  if (!key.ok()) return key.status();
  const Bytes msg = rng.Generate(64);
  std::string family = absl::StrCat(
      scheme == ibs::Scheme::kShamir ? "ibs-shamir-" : "ibs-gq-", bits);
  ibs::Signature sig = ibs::Sign(*key, msg, rng);
  rows.push_back(Summarize(
      family, "sign", Measure([&] { sig = ibs::Sign(*key, msg, rng); }, o),
      o));
  bool ok = true;
  rows.push_back(Summarize(
      family, "verify",
      Measure([&] { ok = ok && ibs::Verify(msk->params, id, msg, sig); }, o),
      o));
  if (!ok) return absl::InternalError(family + " verify failed");
  return absl::OkStatus();
}

absl::Status AddGroup(groupsig::Backend backend, const Options& o,
                      DeterministicRng& rng, std::vector<Row>& rows) {
  absl::StatusOr<groupsig::Group> g =
      groupsig::Generate(backend, o.group_size, rng);
  if (!g.ok()) return g.status();
  const Bytes msg = rng.Generate(64);
  std::string family = "gs-" + groupsig::BackendName(backend);
  Bytes sig;
  bool ok = true;
  rows.push_back(Summarize(family, "sign", Measure([&] {
                             absl::StatusOr<Bytes> s = groupsig::Sign(
                                 g->gpk, g->members.front(), msg, rng);
                             ok = ok && s.ok();
                             if (s.ok()) sig = *std::move(s);
                           }, o),
                           o));
  rows.push_back(Summarize(
      family, "verify",
      Measure([&] { ok = ok && groupsig::Verify(g->gpk, msg, sig); }, o), o));
  if (!ok) return absl::InternalError(family + " failed");
  return absl::OkStatus();
}

void AddDh(crypto::Curve curve, const std::string& name, const Options& o,
           DeterministicRng& rng, std::vector<Row>& rows) {
  const crypto::EcGroup& group = crypto::EcGroup::Get(curve);
  std::string family = "dh-" + name;
  rows.push_back(Summarize(
      family, "keygen", Measure([&] { crypto::DhKeygen(group, rng); }, o),
      o));
  crypto::DhShare a = crypto::DhKeygen(group, rng);
  crypto::DhShare b = crypto::DhKeygen(group, rng);
  rows.push_back(Summarize(
      family, "combine",
      Measure([&] { (void)crypto::DhCombine(a.scalar, b.point); }, o), o));
}

absl::Status AddKem(const crypto::KemKeyPair& kp, const std::string& family,
                    const Options& o, DeterministicRng& rng,
                    std::vector<Row>& rows) {
  absl::StatusOr<crypto::Encapsulation> enc =
      crypto::KemEncapsulate(kp.public_key(), rng);
  if (!enc.ok()) return enc.status();
  rows.push_back(Summarize(
      family, "encapsulate",
      Measure([&] { (void)crypto::KemEncapsulate(kp.public_key(), rng); }, o),
      o));
  rows.push_back(Summarize(
      family, "decapsulate",
      Measure([&] { (void)crypto::KemDecapsulate(kp, enc->ciphertext); }, o),
      o));
  return absl::OkStatus();
}

// Scenario with a persistent user p and an ephemeral user e, both Driver,
// and `n` repetitions of each timed step.
sim::Scenario ProcedureScenario(ibs::Scheme scheme, int bits, int n,
                                uint64_t seed) {
  sim::Scenario sc;
  sc.seed = seed;
  sc.scheme = scheme;
  sc.modulus_bits = bits;
  sc.group_size = static_cast<uint32_t>(n) + 1;
  // Loopback: unbounded frames that bypass the adversary.
  sc.default_channel = {0, true, 0};
  using sim::ActorKind;
  sc.actors = {{ActorKind::kManufacturer, "Man", "", 0},
               {ActorKind::kSeller, "Sel", "", 0},
               {ActorKind::kOwner, "PsO", "", 0},
               {ActorKind::kCar, "car", "1HGCM82633A004352", 0},
               {ActorKind::kUser, "p", "", 0},
               {ActorKind::kUser, "e", "", 0}};
  auto step = [&](sim::StepKind k, std::vector<std::string> actors) {
    sim::Step s;
    s.kind = k;
    s.actors = std::move(actors);
    s.role = "Driver";
    s.command = {"Start Engine", policy::Action::kExecute};
    sc.steps.push_back(s);
    return &sc.steps.back();
  };
  step(sim::StepKind::kSetup, {"Man", "car"});
  step(sim::StepKind::kSetRoot, {"Sel", "PsO", "car"});
  step(sim::StepKind::kUpload, {"PsO", "car"})->role = "Owner";
  step(sim::StepKind::kUpload, {"PsO", "car"});
  for (int i = 0; i < n; ++i) step(sim::StepKind::kDelegate, {"PsO", "p"});
  for (int i = 0; i < n; ++i) {
    step(sim::StepKind::kDelegate, {"PsO", "e"})->delegation =
        protocol::DelegationKind::kEphemeral;
  }
  for (int i = 0; i < n; ++i) step(sim::StepKind::kExecute, {"p", "car"});
  for (int i = 0; i < n; ++i) step(sim::StepKind::kExecute, {"e", "car"});
  for (int i = 0; i < n; ++i) step(sim::StepKind::kOtf, {"p", "car"});
  return sc;
}

}  // namespace

Row Summarize(std::string family, std::string operation,
              const std::vector<double>& samples, const Options& options) {
  Row r{options.device, std::move(family), std::move(operation), 0, 0,
        static_cast<int>(samples.size())};
  if (samples.empty()) return r;
  double sum = 0;
  for (double s : samples) sum += s;
  r.mean_ms = sum / samples.size();
  double sq = 0;
  for (double s : samples) sq += (s - r.mean_ms) * (s - r.mean_ms);
  r.std_ms = samples.size() > 1 ? std::sqrt(sq / (samples.size() - 1)) : 0;
  return r;
}

std::vector<double> Measure(const std::function<void()>& fn,
                            const Options& options) {
  std::vector<double> out;
  for (int i = 0; i < kWarmup + options.iterations; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    if (i >= kWarmup) out.push_back(ms);
  }
  return out;
}

absl::StatusOr<std::vector<Row>> RunPrimitives(const Options& o) {
  if (o.iterations < kMinIterations) {
    return absl::InvalidArgumentError(
        absl::StrCat("at least ", kMinIterations, " iterations required"));
  }
  DeterministicRng rng(o.seed);
  std::vector<Row> rows;
  for (groupsig::Backend b :
       {groupsig::Backend::kReference, groupsig::Backend::kRing}) {
    if (absl::Status s = AddGroup(b, o, rng, rows); !s.ok()) return s;
  }
  for (ibs::Scheme scheme : {ibs::Scheme::kShamir, ibs::Scheme::kGq}) {
    for (int bits : {o.small_bits, o.large_bits}) {
      if (absl::Status s = AddIbs(scheme, bits, o, rng, rows); !s.ok()) {
        return s;
      }
    }
  }
  AddDh(crypto::Curve::kP192, "p192", o, rng, rows);
  AddDh(crypto::Curve::kP256, "p256", o, rng, rows);
  if (absl::Status s = AddKem(
          crypto::KemKeyPair::GenerateDh(crypto::Curve::kP256, rng),
          "kem-dh-p256", o, rng, rows);
      !s.ok()) {
    return s;
  }
  absl::StatusOr<crypto::KemKeyPair> rsa =
      crypto::KemKeyPair::GenerateRsa(o.large_bits, rng);
  if (!rsa.ok()) return rsa.status();
  if (absl::Status s = AddKem(*rsa, absl::StrCat("kem-rsa-", o.large_bits),
                              o, rng, rows);
      !s.ok()) {
    return s;
  }
  return rows;
}

absl::StatusOr<std::vector<Row>> RunProcedures(const Options& o) {
  if (o.iterations < kMinIterations) {
    return absl::InvalidArgumentError(
        absl::StrCat("at least ", kMinIterations, " iterations required"));
  }
  const int n = kWarmup + o.iterations;
  std::vector<Row> rows;
  for (ibs::Scheme scheme : {ibs::Scheme::kShamir, ibs::Scheme::kGq}) {
    std::string family = absl::StrCat(
        "procedure-", scheme == ibs::Scheme::kShamir ? "shamir-" : "gq-",
        o.large_bits);
    absl::StatusOr<std::unique_ptr<sim::Simulator>> sim =
        sim::Simulator::Create(
            ProcedureScenario(scheme, o.large_bits, n, o.seed));
    if (!sim.ok()) return sim.status();
    const sim::Result& r = (*sim)->Run();
    // Setup, set-root and two uploads precede the timed steps.
    const std::vector<sim::StepRecord>& steps = r.steps;
    size_t at = 4;
    for (const char* op :
         {"delegate-persistent", "delegate-ephemeral", "execute-persistent",
          "execute-ephemeral", "execute-otf"}) {
      std::vector<double> samples;
      for (int i = 0; i < n; ++i, ++at) {
        if (!steps[at].started) {
          return absl::InternalError(
              absl::StrCat(family, " ", op, ": ", steps[at].note));
        }
        if (i >= kWarmup) samples.push_back(steps[at].elapsed_ms);
      }
      rows.push_back(Summarize(family, op, samples, o));
    }
    if (r.attack_found() || (*sim)->car("car")->executed().size() !=
                                static_cast<size_t>(3 * n)) {
      return absl::InternalError(family + ": procedures did not complete");
    }
  }
  return rows;
}

std::string ToCsv(const std::vector<Row>& rows, const Options& options) {
  std::string out = absl::StrCat(
      "# first ", kWarmup, " iterations of each cell dropped as warmup; no "
      "other trimming; seed ", options.seed, "\n", kCsvHeader, "\n");
  for (const Row& r : rows) {
    absl::StrAppendFormat(&out, "%s,%s,%s,%.4f,%.4f,%d\n", r.device, r.family,
                          r.operation, r.mean_ms, r.std_ms, r.iterations);
  }
  return out;
}

}  // namespace carsec::bench
