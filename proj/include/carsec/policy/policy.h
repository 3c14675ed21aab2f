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

// Role-based access control over vehicle functions, with attribute
// constraints. Objects are grouped under four macro-objects; a grant on a
// macro-object applies to each object below it unless the object has its
// own entry. Anything not granted is denied.
//
// Policy documents are line oriented; '#' starts a comment.
//
//   role <Name> [root]
//   object <Macro>/<Object name>
//   <Role>; <Object name | @Macro>; <rwe>[; <constraint>, ...]
//
// <rwe> is three characters in the order r, w, e with '-' for a missing
// right. Constraints:
//
//   time(<start>, <stop | inf>)     now within [start, stop]
//   flag(<attribute>)               boolean attribute is true
//   range(<attribute>, <lo>, <hi>)  numeric attribute within [lo, hi]
//
// A '?' before flag or range makes it optional: an absent or null
// attribute then satisfies it. Otherwise absent and null fail. All
// constraints of an entry must hold.

#ifndef CARSEC_POLICY_POLICY_H_
#define CARSEC_POLICY_POLICY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"

namespace carsec::policy {

enum class Macro : uint8_t {
  kEngine = 0,
  kChassis = 1,
  kBody = 2,
  kInfotainment = 3,
};

std::string MacroName(Macro m);
absl::StatusOr<Macro> ParseMacro(const std::string& name);

enum class Action : uint8_t {
  kRead = 0,
  kWrite = 1,
  kExecute = 2,
};

char ActionChar(Action a);
absl::StatusOr<Action> ParseAction(char c);

struct ActionSet {
  bool read = false;
  bool write = false;
  bool execute = false;

  bool Has(Action a) const;
  // Bits r=4, w=2, e=1.
  uint8_t Bits() const;
  // "rwe" with '-' for missing rights, e.g. "--e", "rw-", "---".
  std::string Render() const;
  static absl::StatusOr<ActionSet> Parse(const std::string& text);

  friend bool operator==(const ActionSet&, const ActionSet&) = default;
};

struct Null {
  friend bool operator==(Null, Null) { return true; }
};

// ⊥ is Null: the attribute does not apply.
using Value = std::variant<Null, int64_t, bool>;

struct AttributeValue {
  std::string name;
  Value value;

  friend bool operator==(const AttributeValue&,
                         const AttributeValue&) = default;
};

using Attributes = std::vector<AttributeValue>;

// Canonical byte form for protocol messages: one TLV record per attribute,
// sorted by name.
Bytes EncodeAttributes(const Attributes& attrs);
absl::StatusOr<Attributes> DecodeAttributes(ByteSpan data);
// "name=value" list, value one of a decimal integer, true, false, null.
absl::StatusOr<Attributes> ParseAttributes(const std::string& text);
std::string RenderAttributes(const Attributes& attrs);

inline constexpr uint64_t kForever = ~uint64_t{0};

struct Constraint {
  enum class Kind { kTime, kFlag, kRange };
  Kind kind;
  bool optional = false;
  std::string attribute;
  int64_t lo = 0;
  int64_t hi = 0;
  uint64_t start = 0;
  uint64_t stop = kForever;

  std::string Render() const;
};

struct Entry {
  ActionSet actions;
  std::vector<Constraint> constraints;
};

struct ObjectInfo {
  std::string name;
  Macro macro;
};

enum class DenyReason {
  kNone,
  kUnknownRole,
  kUnknownObject,
  kNotGranted,
  kAttribute,
};

std::string DenyReasonName(DenyReason r);

struct Decision {
  bool allowed = false;
  DenyReason reason = DenyReason::kNotGranted;
  std::string detail;
};

class PermissionTable {
 public:
  // Errors carry "line:column: message".
  static absl::StatusOr<PermissionTable> Load(const std::string& document);

  Decision Check(const std::string& role, const std::string& object,
                 Action action, const Attributes& attributes,
                 uint64_t now) const;

  // Effective rights before constraints; "---" for unknown names.
  ActionSet Rights(const std::string& role, const std::string& object) const;

  const std::vector<std::string>& roles() const { return roles_; }
  const std::vector<ObjectInfo>& objects() const { return objects_; }
  const std::optional<std::string>& root_role() const { return root_; }
  bool HasRole(const std::string& role) const;
  const ObjectInfo* FindObject(const std::string& name) const;

  // Document that loads to an equivalent table. With `expand_macros` every
  // macro-level entry is replaced by one entry per uncovered child.
  std::string ToDocument(bool expand_macros = false) const;

 private:
  const Entry* Lookup(const std::string& role,
                      const std::string& object) const;

  std::vector<std::string> roles_;
  std::optional<std::string> root_;
  std::vector<ObjectInfo> objects_;
  // Keys are (role, object name) and (role, "@" + macro name).
  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

// The example rights table shipped with the library: six roles by
// seventeen objects.
const std::string& DefaultPolicyDocument();

// 17 characters from [A-HJ-NPR-Z0-9] after uppercasing.
absl::StatusOr<std::string> ValidateVin(const std::string& text);

}  // namespace carsec::policy

#endif  // CARSEC_POLICY_POLICY_H_
