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


// carsec: key ceremonies, policy queries, scenario runs and benchmarks.
//
// Exit codes: 0 success, 1 a negative verdict (deny, failed verification,
// unexpected scenario outcome), 2 usage or input errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "carsec/bench/bench.h"
#include "carsec/crypto/rng.h"
#include "carsec/groupsig/groupsig.h"
#include "carsec/ibs/ibs.h"
#include "carsec/policy/policy.h"
#include "carsec/sim/simulator.h"

namespace {

namespace fs = std::filesystem;
using carsec::Bytes;

constexpr int kUsage = 2;

int Fail(const std::string& message, int code = kUsage) {
  std::cerr << "carsec: " << message << "\n";
  return code;
}

bool ReadFile(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool WriteFile(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  return static_cast<bool>(out);
}

bool WriteFile(const fs::path& path, const Bytes& data) {
  return WriteFile(path, carsec::ToString(data));
}

struct KeygenArgs {
  std::string scheme;
  int params = 0;
  std::string out;
  uint64_t seed = 1;
  std::vector<std::string> identities;
};

int Keygen(const KeygenArgs& a) {
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec || !fs::is_directory(a.out)) {
    return Fail(absl::StrCat("cannot create ", a.out));
  }
  carsec::crypto::DeterministicRng rng(a.seed);
  const fs::path dir(a.out);
  std::vector<std::pair<fs::path, Bytes>> files;

  if (a.scheme == "shamir" || a.scheme == "gq") {
    carsec::ibs::SetupOptions opt;
    opt.scheme = a.scheme == "shamir" ? carsec::ibs::Scheme::kShamir
                                      : carsec::ibs::Scheme::kGq;
    opt.modulus_bits = a.params;
    absl::StatusOr<carsec::ibs::MasterKey> msk = carsec::ibs::Setup(opt, rng);
    if (!msk.ok()) return Fail(std::string(msk.status().message()));
    files.push_back({dir / "master.key", carsec::ibs::EncodeMasterKey(*msk)});
    files.push_back(
        {dir / "params.pub", carsec::ibs::EncodePublicParams(msk->params)});
    for (const std::string& id : a.identities) {
      absl::StatusOr<carsec::ibs::UserKey> k =
          carsec::ibs::KeyDer(*msk, carsec::ToBytes(id));
      if (!k.ok()) return Fail(std::string(k.status().message()));
      files.push_back({dir / (id + ".key"), carsec::ibs::EncodeUserKey(*k)});
    }
  } else {
    absl::StatusOr<carsec::groupsig::Backend> backend =
        carsec::groupsig::ParseBackend(a.scheme);
    if (!backend.ok()) return Fail("unknown scheme '" + a.scheme + "'");
    if (a.params < 1) return Fail("group size must be at least 1");
    absl::StatusOr<carsec::groupsig::Group> g = carsec::groupsig::Generate(
        *backend, static_cast<uint32_t>(a.params), rng);
    if (!g.ok()) return Fail(std::string(g.status().message()));
    files.push_back({dir / "gpk", carsec::groupsig::EncodePublicKey(g->gpk)});
    files.push_back(
        {dir / "gmsk", carsec::groupsig::EncodeManagerKey(g->gmsk)});
    for (const carsec::groupsig::GroupMemberKey& m : g->members) {
      files.push_back({dir / absl::StrCat("member-", m.index),
                       carsec::groupsig::EncodeMemberKey(m)});
    }
  }
  for (const auto& [path, data] : files) {
    if (!WriteFile(path, data)) return Fail("cannot write " + path.string());
    std::cout << path.string() << "\n";
  }
  return 0;
}

int Sign(const std::string& key_path, const std::string& message,
         const std::string& out, uint64_t seed) {
  std::string file;
  if (!ReadFile(key_path, file)) return Fail("cannot read " + key_path);
  absl::StatusOr<carsec::ibs::UserKey> key =
      carsec::ibs::DecodeUserKey(carsec::ToBytes(file));
  if (!key.ok()) return Fail(std::string(key.status().message()));
  carsec::crypto::DeterministicRng rng(seed);
  carsec::ibs::Signature sig =
      carsec::ibs::Sign(*key, carsec::ToBytes(message), rng);
  if (!WriteFile(out, carsec::ibs::EncodeSignature(key->params, sig))) {
    return Fail("cannot write " + out);
  }
  return 0;
}

int Verify(const std::string& params_path, const std::string& identity,
           const std::string& message, const std::string& sig_path) {
  std::string params_file, sig;
  if (!ReadFile(params_path, params_file)) {
    return Fail("cannot read " + params_path);
  }
  if (!ReadFile(sig_path, sig)) return Fail("cannot read " + sig_path);
  absl::StatusOr<carsec::ibs::PublicParams> params =
      carsec::ibs::DecodePublicParams(carsec::ToBytes(params_file));
  if (!params.ok()) return Fail(std::string(params.status().message()));
  bool ok = carsec::ibs::VerifyEncoded(*params, carsec::ToBytes(identity),
                                       carsec::ToBytes(message),
                                       carsec::ToBytes(sig));
  std::cout << (ok ? "valid" : "invalid") << "\n";
  return ok ? 0 : 1;
}

struct PolicyArgs {
  std::string file;
  std::string role;
  std::string object;
  std::string action = "e";
  std::string attrs;
  uint64_t time = carsec::sim::kEpoch;
};

int PolicyCheck(const PolicyArgs& a) {
  std::string doc = carsec::policy::DefaultPolicyDocument();
  if (!a.file.empty() && !ReadFile(a.file, doc)) {
    return Fail("cannot read " + a.file);
  }
  absl::StatusOr<carsec::policy::PermissionTable> t =
      carsec::policy::PermissionTable::Load(doc);
  if (!t.ok()) {
    return Fail(absl::StrCat(a.file.empty() ? "builtin" : a.file, ":",
                             t.status().message()));
  }
  if (a.role.empty()) {
    // The whole matrix, one row per object.
    std::cout << "object";
    for (const std::string& r : t->roles()) std::cout << "," << r;
    std::cout << "\n";
    for (const carsec::policy::ObjectInfo& o : t->objects()) {
      std::cout << o.name;
      for (const std::string& r : t->roles()) {
        std::cout << "," << t->Rights(r, o.name).Render();
      }
      std::cout << "\n";
    }
    return 0;
  }
  if (a.object.empty()) return Fail("--object is required with --role");
  absl::StatusOr<carsec::policy::Action> act =
      a.action.size() == 1 ? carsec::policy::ParseAction(a.action[0])
                           : absl::InvalidArgumentError("");
  if (!act.ok()) return Fail("action must be r, w or e");
  absl::StatusOr<carsec::policy::Attributes> attrs =
      carsec::policy::ParseAttributes(a.attrs);
  if (!attrs.ok()) return Fail(std::string(attrs.status().message()));
  carsec::policy::Decision d = t->Check(a.role, a.object, *act, *attrs, a.time);
  if (d.allowed) {
    std::cout << "allow\n";
    return 0;
  }
  std::cout << "deny " << carsec::policy::DenyReasonName(d.reason)
            << (d.detail.empty() ? "" : " ") << d.detail << "\n";
  return 1;
}

absl::StatusOr<carsec::sim::Scenario> LoadScenario(const std::string& path) {
  std::string text;
  if (!ReadFile(path, text)) {
    return absl::NotFoundError(absl::StrCat(path, ": cannot read"));
  }
  absl::StatusOr<carsec::sim::Scenario> sc = carsec::sim::ParseScenario(text);
  if (!sc.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ":", sc.status().message()));
  }
  return sc;
}

struct ScenarioArgs {
  std::string file;
  std::string transcript;
  std::optional<uint64_t> seed;
  bool battery = false;
  bool extended = false;
};

int RunOne(const carsec::sim::Scenario& sc, const ScenarioArgs& a) {
  absl::StatusOr<std::unique_ptr<carsec::sim::Simulator>> sim =
      carsec::sim::Simulator::Create(sc);
  if (!sim.ok()) return Fail(std::string(sim.status().message()));
  const carsec::sim::Result& r = (*sim)->Run();
  if (a.transcript.empty()) {
    std::cout << r.TranscriptText();
  } else if (!WriteFile(a.transcript, r.TranscriptText())) {
    return Fail("cannot write " + a.transcript);
  }
  for (const carsec::sim::ActionRecord& e : (*sim)->Executed()) {
    std::cout << "executed " << e.car << " " << e.role << " "
              << carsec::protocol::RenderCommand(e.command) << "\n";
  }
  bool expect_attack = sc.expect == carsec::sim::Expectation::kAttack;
  std::cout << "verdict " << (r.attack_found() ? "attack-found" : "safe")
            << " (expected " << (expect_attack ? "attack" : "safe") << ")\n";
  return r.Passed(sc.expect) ? 0 : 1;
}

int RunBattery(const carsec::sim::Scenario& base, const ScenarioArgs& a) {
  using carsec::wire::Procedure;
  std::vector<Procedure> procs = {Procedure::kExecute, Procedure::kExecuteOtf};
  if (a.extended) {
    procs.insert(procs.begin(), {Procedure::kSetRoot, Procedure::kUploadGpk,
                                 Procedure::kDelegate});
  }
  int failures = 0;
  for (const carsec::sim::Scenario& v :
       carsec::sim::SafetyBattery(base, procs)) {
    absl::StatusOr<std::unique_ptr<carsec::sim::Simulator>> sim =
        carsec::sim::Simulator::Create(v);
    if (!sim.ok()) return Fail(std::string(sim.status().message()));
    const carsec::sim::Result& r = (*sim)->Run();
    std::cout << carsec::sim::RenderStrategy(v.strategy) << ": "
              << (r.strategy_applied ? "applied" : "not-applied") << " "
              << (r.attack_found() ? "attack-found" : "safe") << "\n";
    for (const std::string& viol : r.violations) {
      std::cout << "  " << viol << "\n";
    }
    if (r.attack_found()) ++failures;
  }
  std::cout << "battery " << (failures == 0 ? "safe" : "attack-found") << "\n";
  return failures == 0 ? 0 : 1;
}

int Scenario(const ScenarioArgs& a) {
  absl::StatusOr<carsec::sim::Scenario> sc = LoadScenario(a.file);
  if (!sc.ok()) return Fail(std::string(sc.status().message()));
  if (a.seed) sc->seed = *a.seed;
  return a.battery ? RunBattery(*sc, a) : RunOne(*sc, a);
}

struct BenchArgs {
  std::string suite = "primitives";
  std::string out;
  carsec::bench::Options options;
};

int Bench(const BenchArgs& a) {
  absl::StatusOr<std::vector<carsec::bench::Row>> rows =
      a.suite == "primitives" ? carsec::bench::RunPrimitives(a.options)
                              : carsec::bench::RunProcedures(a.options);
  if (!rows.ok()) return Fail(std::string(rows.status().message()), 1);
  std::string csv = carsec::bench::ToCsv(*rows, a.options);
  if (a.out.empty()) {
    std::cout << csv;
  } else if (!WriteFile(a.out, csv)) {
    return Fail("cannot write " + a.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carsec: car access protocol tools"};
  app.require_subcommand(1);

  KeygenArgs kg;
  CLI::App* keygen = app.add_subcommand(
      "keygen", "Generate IBS master keys or a signature group");
  keygen->add_option("--scheme", kg.scheme, "shamir, gq, reference or ring")
      ->required();
  keygen->add_option("--params", kg.params,
                     "IBS modulus bits, or group member count")
      ->required();
  keygen->add_option("--out", kg.out, "Output directory")->required();
  keygen->add_option("--seed", kg.seed, "RNG seed");
  keygen->add_option("--identity", kg.identities,
                     "IBS identities to derive user keys for");

  std::string sign_key, sign_msg, sign_out;
  uint64_t sign_seed = 1;
  CLI::App* sign = app.add_subcommand("sign", "Sign a message with an IBS key");
  sign->add_option("--key", sign_key)->required();
  sign->add_option("--message", sign_msg)->required();
  sign->add_option("--out", sign_out)->required();
  sign->add_option("--seed", sign_seed);

  std::string ver_params, ver_id, ver_msg, ver_sig;
  CLI::App* verify =
      app.add_subcommand("verify", "Verify an IBS signature file");
  verify->add_option("--params", ver_params)->required();
  verify->add_option("--identity", ver_id)->required();
  verify->add_option("--message", ver_msg)->required();
  verify->add_option("--sig", ver_sig)->required();

  PolicyArgs pa;
  CLI::App* policy = app.add_subcommand("policy", "Inspect a policy");
  policy->require_subcommand(1);
  CLI::App* check = policy->add_subcommand(
      "check", "Decide one request, or print the matrix without --role");
  check->add_option("--policy", pa.file, "Policy file; default: built-in");
  check->add_option("--role", pa.role);
  check->add_option("--object", pa.object);
  check->add_option("--action", pa.action, "r, w or e");
  check->add_option("--attrs", pa.attrs, "name=value,...");
  check->add_option("--time", pa.time, "Unix seconds");

  ScenarioArgs sa;
  CLI::App* scenario = app.add_subcommand("scenario", "Simulator runs");
  scenario->require_subcommand(1);
  CLI::App* run = scenario->add_subcommand("run", "Run one scenario file");
  run->add_option("file", sa.file)->required();
  run->add_option("--seed", sa.seed, "Override the scenario seed");
  run->add_option("--out", sa.transcript, "Transcript file; default stdout");
  run->add_flag("--battery", sa.battery,
                "Run the safety battery over Execute and Execute-OTF");
  run->add_flag("--extended", sa.extended,
                "Battery also covers SetRoot, UploadGpk and Delegate");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Benchmark suites");
  bench->add_option("--suite", ba.suite)
      ->check(CLI::IsMember({"primitives", "procedures"}));
  bench->add_option("--iterations", ba.options.iterations)
      ->check(CLI::Range(carsec::bench::kMinIterations, 100000));
  bench->add_option("--device", ba.options.device, "Device label");
  bench->add_option("--seed", ba.options.seed);
  bench->add_option("--params", ba.options.large_bits,
                    "Large IBS modulus bits");
  bench->add_option("--out", ba.out, "CSV file; default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (keygen->parsed()) return Keygen(kg);
  if (sign->parsed()) return Sign(sign_key, sign_msg, sign_out, sign_seed);
  if (verify->parsed()) return Verify(ver_params, ver_id, ver_msg, ver_sig);
  if (check->parsed()) return PolicyCheck(pa);
  if (run->parsed()) return Scenario(sa);
  if (bench->parsed()) return Bench(ba);
  return kUsage;
}
