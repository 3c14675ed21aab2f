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


#include "carsec/policy/policy.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "carsec/crypto/rng.h"

namespace carsec::policy {
namespace {

using crypto::DeterministicRng;

// Expected rights, cell by cell. Columns:
// Owner, Driver, Technician, Child occupant, Valet, Passenger.
struct Row {
  const char* object;
  const char* cells[6];
};

constexpr const char* kRoles[6] = {"Owner",         "Driver", "Technician",
                                   "ChildOccupant", "Valet",  "Passenger"};

constexpr Row kExpected[17] = {
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

constexpr Action kActions[3] = {Action::kRead, Action::kWrite,
                                Action::kExecute};

PermissionTable DefaultTable() {
  return *PermissionTable::Load(DefaultPolicyDocument());
}

TEST(DefaultPolicyTest, ShapeSixRolesSeventeenObjects) {
  PermissionTable t = DefaultTable();
  EXPECT_EQ(t.roles().size(), 6u);
  EXPECT_EQ(t.objects().size(), 17u);
  EXPECT_EQ(t.root_role(), "Owner");
}

TEST(DefaultPolicyTest, FullDecisionMatrixMatches) {
  PermissionTable t = DefaultTable();
  int assertions = 0;
  for (const Row& row : kExpected) {
    for (int r = 0; r < 6; ++r) {
      const std::string cell = row.cells[r];
      for (int a = 0; a < 3; ++a) {
        bool want = cell[a] != '-';
        Decision d = t.Check(kRoles[r], row.object, kActions[a], {}, 0);
        EXPECT_EQ(d.allowed, want) << kRoles[r] << " " << row.object << " "
                                   << ActionChar(kActions[a]);
        ++assertions;
      }
      EXPECT_EQ(t.Rights(kRoles[r], row.object).Render(), cell);
    }
  }
  EXPECT_EQ(assertions, 306);
}

TEST(DefaultPolicyTest, NamedCells) {
  PermissionTable t = DefaultTable();
  EXPECT_TRUE(t.Check("Driver", "Start Engine", Action::kExecute, {}, 0)
                  .allowed);
  EXPECT_FALSE(t.Check("Owner", "Start Engine", Action::kExecute, {}, 0)
                   .allowed);
  EXPECT_TRUE(t.Check("Technician", "SW Update", Action::kExecute, {}, 0)
                  .allowed);
  EXPECT_FALSE(t.Check("Valet", "SW Update", Action::kExecute, {}, 0)
                   .allowed);
  Decision d = t.Check("Passenger", "Fuel Level", Action::kRead, {}, 0);
  EXPECT_FALSE(d.allowed);
  EXPECT_EQ(d.reason, DenyReason::kNotGranted);
}

TEST(DefaultPolicyTest, ShippedFileMatchesBuiltin) {
  std::ifstream in(CARSEC_SOURCE_DIR "/data/policies/default.policy");
  ASSERT_TRUE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), DefaultPolicyDocument());
}

TEST(LoadTest, EmptyDocumentDeniesEverything) {
  PermissionTable t = *PermissionTable::Load("");
  EXPECT_TRUE(t.roles().empty());
  Decision d = t.Check("Owner", "Open Doors", Action::kExecute, {}, 0);
  EXPECT_FALSE(d.allowed);
  EXPECT_EQ(d.reason, DenyReason::kUnknownRole);
}

TEST(LoadTest, DuplicateEntryRejectedWithLocation) {
  absl::StatusOr<PermissionTable> t = PermissionTable::Load(
      "role A\nobject Body/Door\nA; Door; --e\n  A; Door; r--\n");
  ASSERT_FALSE(t.ok());
  EXPECT_EQ(t.status().message().substr(0, 4), "4:3:");
}

TEST(LoadTest, UnknownNamesRejected) {
  EXPECT_FALSE(PermissionTable::Load("role A\nB; @Body; --e\n").ok());
  absl::StatusOr<PermissionTable> t =
      PermissionTable::Load("role A\nA;  Trunk; --e\n");
  ASSERT_FALSE(t.ok());
  EXPECT_EQ(t.status().message().substr(0, 4), "2:5:");
  EXPECT_FALSE(PermissionTable::Load("role A\nA; @Wheels; --e\n").ok());
  EXPECT_FALSE(PermissionTable::Load("object Roof/Sunroof\n").ok());
}

TEST(LoadTest, MalformedRightsAndConstraintsRejected) {
  const std::string head = "role A\nobject Body/Door\n";
  EXPECT_FALSE(PermissionTable::Load(head + "A; Door; ewr\n").ok());
  EXPECT_FALSE(PermissionTable::Load(head + "A; Door; --e; when(1)\n").ok());
  EXPECT_FALSE(PermissionTable::Load(head + "A; Door; --e; time(5, 1)\n").ok());
  EXPECT_FALSE(
      PermissionTable::Load(head + "A; Door; --e; range(x, 1)\n").ok());
  EXPECT_FALSE(PermissionTable::Load(head + "A; Door\n").ok());
  EXPECT_FALSE(PermissionTable::Load("role A root\nrole B root\n").ok());
}

TEST(CheckTest, UnknownRoleOrObjectDenied) {
  PermissionTable t = DefaultTable();
  EXPECT_EQ(t.Check("Pilot", "Open Doors", Action::kExecute, {}, 0).reason,
            DenyReason::kUnknownRole);
  EXPECT_EQ(t.Check("Driver", "Warp", Action::kExecute, {}, 0).reason,
            DenyReason::kUnknownObject);
}

TEST(CheckTest, TimeWindowViolationDeniesDespiteGrant) {
  PermissionTable t = *PermissionTable::Load(
      "role Valet\nobject Engine/Start Engine\n"
      "Valet; Start Engine; --e; time(1000, 2000)\n");
  EXPECT_TRUE(t.Check("Valet", "Start Engine", Action::kExecute, {}, 1500)
                  .allowed);
  Decision late = t.Check("Valet", "Start Engine", Action::kExecute, {}, 2001);
  EXPECT_FALSE(late.allowed);
  EXPECT_EQ(late.reason, DenyReason::kAttribute);
  EXPECT_FALSE(
      t.Check("Valet", "Start Engine", Action::kExecute, {}, 999).allowed);
}

TEST(CheckTest, FlagsRangesAndOptionalNull) {
  PermissionTable t = *PermissionTable::Load(
      "role Driver\nobject Engine/Start Engine\nobject Body/Lights\n"
      "Driver; Start Engine; --e; flag(has_license), range(age, 18, 99)\n"
      "Driver; Lights; --e; ?range(distance, 0, 50), time(0, inf)\n");
  auto check = [&](const std::string& obj, const Attributes& a) {
    return t.Check("Driver", obj, Action::kExecute, a, 10).allowed;
  };
  EXPECT_TRUE(check("Start Engine", {{"has_license", true}, {"age", 30}}));
  EXPECT_FALSE(check("Start Engine", {{"has_license", false}, {"age", 30}}));
  EXPECT_FALSE(check("Start Engine", {{"has_license", true}, {"age", 17}}));
  EXPECT_FALSE(check("Start Engine", {{"has_license", true}}));
  EXPECT_FALSE(
      check("Start Engine", {{"has_license", true}, {"age", Null{}}}));
  EXPECT_FALSE(check("Start Engine", {{"has_license", 1}, {"age", 30}}));
  EXPECT_TRUE(check("Lights", {}));
  EXPECT_TRUE(check("Lights", {{"distance", Null{}}}));
  EXPECT_TRUE(check("Lights", {{"distance", 50}}));
  EXPECT_FALSE(check("Lights", {{"distance", 51}}));
}

TEST(CheckTest, ObjectEntryOverridesMacro) {
  PermissionTable t = *PermissionTable::Load(
      "role Valet\nobject Body/Lights\nobject Body/Alarm\n"
      "Valet; @Body; --e\nValet; Alarm; ---\n");
  EXPECT_TRUE(t.Check("Valet", "Lights", Action::kExecute, {}, 0).allowed);
  EXPECT_FALSE(t.Check("Valet", "Alarm", Action::kExecute, {}, 0).allowed);
}

// Random policy over the Table-1 roles and objects mixing macro-level and
// object-level entries.
std::string RandomPolicy(DeterministicRng& rng) {
  std::string doc;
  for (const char* r : kRoles) doc += std::string("role ") + r + "\n";
  PermissionTable base = DefaultTable();
  for (const ObjectInfo& o : base.objects()) {
    doc += "object " + MacroName(o.macro) + "/" + o.name + "\n";
  }
  const char* kConstraints[] = {"",
                                "; time(100, 200)",
                                "; flag(has_license)",
                                "; ?range(age, 18, 70)",
                                "; range(distance, 0, 10), flag(has_license)"};
  for (const char* r : kRoles) {
    for (int m = 0; m < 4; ++m) {
      if (rng.Uniform(2) == 0) continue;
      doc += std::string(r) + "; @" + MacroName(static_cast<Macro>(m)) +
             "; " + ActionSet{rng.Uniform(2) == 1, rng.Uniform(2) == 1,
                              rng.Uniform(2) == 1}
                        .Render() +
             kConstraints[rng.Uniform(5)] + "\n";
    }
    for (const ObjectInfo& o : base.objects()) {
      if (rng.Uniform(4) != 0) continue;
      doc += std::string(r) + "; " + o.name + "; " +
             ActionSet{rng.Uniform(2) == 1, false, rng.Uniform(2) == 1}
                 .Render() +
             kConstraints[rng.Uniform(5)] + "\n";
    }
  }
  return doc;
}

Attributes RandomAttributes(DeterministicRng& rng) {
  Attributes a;
  auto value = [&rng](int kind) -> Value {
    if (rng.Uniform(4) == 0) return Null{};
    if (kind == 0) return rng.Uniform(2) == 1;
    return static_cast<int64_t>(rng.Uniform(90));
  };
  if (rng.Uniform(4) != 0) a.push_back({"has_license", value(0)});
  if (rng.Uniform(4) != 0) a.push_back({"age", value(1)});
  if (rng.Uniform(4) != 0) a.push_back({"distance", value(1)});
  return a;
}

TEST(PropertyTest, MacroPropagationEqualsExpansion) {
  DeterministicRng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    PermissionTable t = *PermissionTable::Load(RandomPolicy(rng));
    std::string expanded_doc = t.ToDocument(/*expand_macros=*/true);
    ASSERT_EQ(expanded_doc.find('@'), std::string::npos);
    PermissionTable expanded = *PermissionTable::Load(expanded_doc);
    for (int k = 0; k < 20; ++k) {
      Attributes attrs = RandomAttributes(rng);
      uint64_t now = 50 + rng.Uniform(200);
      for (const char* r : kRoles) {
        for (const ObjectInfo& o : t.objects()) {
          for (Action a : kActions) {
            ASSERT_EQ(t.Check(r, o.name, a, attrs, now).allowed,
                      expanded.Check(r, o.name, a, attrs, now).allowed);
          }
        }
      }
    }
  }
}

TEST(PropertyTest, DocumentRoundTrip) {
  DeterministicRng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    PermissionTable t = *PermissionTable::Load(RandomPolicy(rng));
    PermissionTable again = *PermissionTable::Load(t.ToDocument());
    EXPECT_EQ(again.ToDocument(), t.ToDocument());
  }
}

TEST(PropertyTest, NullNeverTurnsDenyIntoAllowForRequiredAttributes) {
  DeterministicRng rng(3);
  // Only required constraints on attributes.
  PermissionTable t = *PermissionTable::Load(
      "role Driver\nobject Engine/Start Engine\nobject Body/Lights\n"
      "Driver; Start Engine; --e; flag(has_license), range(age, 18, 70)\n"
      "Driver; @Body; --e; range(distance, 0, 10)\n");
  int flips_checked = 0;
  for (int i = 0; i < 2000; ++i) {
    Attributes attrs = RandomAttributes(rng);
    for (const char* obj : {"Start Engine", "Lights"}) {
      bool before = t.Check("Driver", obj, Action::kExecute, attrs, 0).allowed;
      for (size_t j = 0; j < attrs.size(); ++j) {
        Attributes nulled = attrs;
        nulled[j].value = Null{};
        bool after =
            t.Check("Driver", obj, Action::kExecute, nulled, 0).allowed;
        ASSERT_FALSE(!before && after);
        ++flips_checked;
      }
    }
  }
  EXPECT_GT(flips_checked, 1000);
}

TEST(AttributesTest, EncodeDecodeRoundTrip) {
  Attributes a = {{"zeta", int64_t{-5}}, {"age", int64_t{40}},
                  {"has_license", true}, {"distance", Null{}}};
  Attributes decoded = *DecodeAttributes(EncodeAttributes(a));
  ASSERT_EQ(decoded.size(), 4u);
  EXPECT_EQ(decoded[0].name, "age");
  EXPECT_EQ(std::get<int64_t>(decoded[3].value), -5);
  EXPECT_EQ(EncodeAttributes(decoded), EncodeAttributes(a));
  EXPECT_TRUE(DecodeAttributes({})->empty());
  EXPECT_FALSE(DecodeAttributes(Bytes{1, 0, 1, 0}).ok());
}

TEST(AttributesTest, TextForm) {
  Attributes a = *ParseAttributes("has_license=true, age=30,distance=null");
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(RenderAttributes(a), "has_license=true,age=30,distance=null");
  EXPECT_FALSE(ParseAttributes("age").ok());
  EXPECT_FALSE(ParseAttributes("age=old").ok());
  EXPECT_FALSE(ParseAttributes("age=1,age=2").ok());
  EXPECT_TRUE(ParseAttributes("")->empty());
}

TEST(VinTest, Rules) {
  EXPECT_EQ(*ValidateVin("1hgcm82633a004352"), "1HGCM82633A004352");
  EXPECT_FALSE(ValidateVin("1HGCM82633A00435").ok());
  EXPECT_FALSE(ValidateVin("1HGCM82633A0043521").ok());
  EXPECT_FALSE(ValidateVin("1HGCM82633AO04352").ok());
  EXPECT_FALSE(ValidateVin("1HGCM82633AI04352").ok());
  EXPECT_FALSE(ValidateVin("1HGCM82633AQ04352").ok());
  EXPECT_FALSE(ValidateVin("1HGCM82633A-04352").ok());
}

TEST(ActionSetTest, RenderParseBits) {
  for (uint8_t bits = 0; bits < 8; ++bits) {
    ActionSet s{(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0};
    EXPECT_EQ(s.Bits(), bits);
    EXPECT_EQ(*ActionSet::Parse(s.Render()), s);
  }
  EXPECT_EQ((ActionSet{true, true, false}).Render(), "rw-");
}

}  // namespace
}  // namespace carsec::policy
