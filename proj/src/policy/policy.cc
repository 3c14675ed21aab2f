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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "carsec/wire/tlv.h"

namespace carsec::policy {
namespace {

constexpr uint8_t kAttributeTag = 1;
enum : uint8_t { kTypeNull = 0, kTypeInt = 1, kTypeBool = 2 };

constexpr const char* kMacroNames[] = {"Engine", "Chassis", "Body",
                                       "Infotainment"};

std::string Trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Piece of a line with the 1-based column it starts at.
struct Piece {
  std::string text;
  size_t column;
};

// Splits on `sep` outside parentheses and trims each piece.
std::vector<Piece> SplitTopLevel(const std::string& s, size_t base_column,
                                 char sep) {
  std::vector<Piece> out;
  int depth = 0;
  size_t start = 0;
  auto push = [&](size_t end) {
    std::string raw = s.substr(start, end - start);
    size_t lead = 0;
    while (lead < raw.size() &&
           std::isspace(static_cast<unsigned char>(raw[lead]))) {
      ++lead;
    }
    out.push_back({Trim(raw), base_column + start + lead});
  };
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      push(i);
      start = i + 1;
    }
  }
  push(s.size());
  return out;
}

bool ParseInt(const std::string& s, int64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool ParseU64(const std::string& s, uint64_t& out) {
  if (s == "inf") {
    out = kForever;
    return true;
  }
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool ValidAttributeName(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-';
  });
}

absl::StatusOr<Constraint> ParseConstraint(const std::string& text) {
  Constraint c;
  std::string body = text;
  if (!body.empty() && body[0] == '?') {
    c.optional = true;
    body = Trim(body.substr(1));
  }
  size_t open = body.find('(');
  if (open == std::string::npos || body.back() != ')') {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed constraint '", text, "'"));
  }
  std::string kind = Trim(body.substr(0, open));
  std::vector<Piece> args =
      SplitTopLevel(body.substr(open + 1, body.size() - open - 2), 0, ',');
  if (kind == "time") {
    if (c.optional) {
      return absl::InvalidArgumentError("time constraints cannot be optional");
    }
    c.kind = Constraint::Kind::kTime;
    if (args.size() != 2 || !ParseU64(args[0].text, c.start) ||
        args[0].text == "inf" || !ParseU64(args[1].text, c.stop) ||
        c.stop < c.start) {
      return absl::InvalidArgumentError("time(start, stop|inf) expected");
    }
    return c;
  }
  if (kind == "flag") {
    c.kind = Constraint::Kind::kFlag;
    if (args.size() != 1 || !ValidAttributeName(args[0].text)) {
      return absl::InvalidArgumentError("flag(attribute) expected");
    }
    c.attribute = args[0].text;
    return c;
  }
  if (kind == "range") {
    c.kind = Constraint::Kind::kRange;
    if (args.size() != 3 || !ValidAttributeName(args[0].text) ||
        !ParseInt(args[1].text, c.lo) || !ParseInt(args[2].text, c.hi) ||
        c.hi < c.lo) {
      return absl::InvalidArgumentError("range(attribute, lo, hi) expected");
    }
    c.attribute = args[0].text;
    return c;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown constraint kind '", kind, "'"));
}

const Value* FindAttribute(const Attributes& attrs, const std::string& name) {
  for (const AttributeValue& a : attrs) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

// Empty string when satisfied, otherwise the reason.
std::string Evaluate(const Constraint& c, const Attributes& attrs,
                     uint64_t now) {
  if (c.kind == Constraint::Kind::kTime) {
    if (now < c.start || now > c.stop) {
      return absl::StrCat("outside ", c.Render());
    }
    return "";
  }
  const Value* v = FindAttribute(attrs, c.attribute);
  if (v == nullptr || std::holds_alternative<Null>(*v)) {
    return c.optional ? "" : absl::StrCat(c.attribute, " is absent");
  }
  if (c.kind == Constraint::Kind::kFlag) {
    const bool* b = std::get_if<bool>(v);
    if (b == nullptr || !*b) return absl::StrCat(c.attribute, " not set");
    return "";
  }
  const int64_t* n = std::get_if<int64_t>(v);
  if (n == nullptr || *n < c.lo || *n > c.hi) {
    return absl::StrCat(c.attribute, " outside ", c.Render());
  }
  return "";
}

std::string RenderEntry(const std::string& role, const std::string& target,
                        const Entry& e) {
  std::string line = absl::StrCat(role, "; ", target, "; ", e.actions.Render());
  for (size_t i = 0; i < e.constraints.size(); ++i) {
    absl::StrAppend(&line, i == 0 ? "; " : ", ", e.constraints[i].Render());
  }
  return line;
}

std::string MacroKey(Macro m) { return absl::StrCat("@", MacroName(m)); }

absl::Status LineError(size_t line, size_t column, const std::string& msg) {
  return absl::InvalidArgumentError(absl::StrCat(line, ":", column, ": ", msg));
}

}  // namespace

std::string MacroName(Macro m) {
  return kMacroNames[static_cast<int>(m)];
}

absl::StatusOr<Macro> ParseMacro(const std::string& name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kMacroNames[i]) return static_cast<Macro>(i);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown macro-object '", name, "'"));
}

char ActionChar(Action a) {
  switch (a) {
    case Action::kRead:
      return 'r';
    case Action::kWrite:
      return 'w';
    case Action::kExecute:
      return 'e';
  }
  return '?';
}

absl::StatusOr<Action> ParseAction(char c) {
  switch (c) {
    case 'r':
      return Action::kRead;
    case 'w':
      return Action::kWrite;
    case 'e':
      return Action::kExecute;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown action '",
                                                 std::string(1, c), "'"));
}

bool ActionSet::Has(Action a) const {
  switch (a) {
    case Action::kRead:
      return read;
    case Action::kWrite:
      return write;
    case Action::kExecute:
      return execute;
  }
  return false;
}

uint8_t ActionSet::Bits() const {
  return (read ? 4 : 0) | (write ? 2 : 0) | (execute ? 1 : 0);
}

std::string ActionSet::Render() const {
  return {read ? 'r' : '-', write ? 'w' : '-', execute ? 'e' : '-'};
}

absl::StatusOr<ActionSet> ActionSet::Parse(const std::string& text) {
  if (text.size() != 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("rights '", text, "' must be three characters"));
  }
  ActionSet s;
  const char kExpected[] = {'r', 'w', 'e'};
  bool* slots[] = {&s.read, &s.write, &s.execute};
  for (int i = 0; i < 3; ++i) {
    if (text[i] == kExpected[i]) {
      *slots[i] = true;
    } else if (text[i] != '-') {
      return absl::InvalidArgumentError(
          absl::StrCat("rights '", text, "': position ", i + 1, " must be '",
                       std::string(1, kExpected[i]), "' or '-'"));
    }
  }
  return s;
}

Bytes EncodeAttributes(const Attributes& attrs) {
  Attributes sorted = attrs;
  std::sort(sorted.begin(), sorted.end(),
            [](const AttributeValue& a, const AttributeValue& b) {
              return a.name < b.name;
            });
  wire::TlvWriter w;
  for (const AttributeValue& a : sorted) {
    Bytes rec;
    rec.push_back(static_cast<uint8_t>(a.name.size()));
    Append(rec, ToBytes(a.name));
    if (const int64_t* n = std::get_if<int64_t>(&a.value)) {
      rec.push_back(kTypeInt);
      AppendUint(rec, static_cast<uint64_t>(*n), 8);
    } else if (const bool* b = std::get_if<bool>(&a.value)) {
      rec.push_back(kTypeBool);
      rec.push_back(*b ? 1 : 0);
    } else {
      rec.push_back(kTypeNull);
    }
    w.Add(kAttributeTag, rec);
  }
  return std::move(w).Finish();
}

absl::StatusOr<Attributes> DecodeAttributes(ByteSpan data) {
  absl::StatusOr<wire::TlvReader> r = wire::TlvReader::Parse(data);
  if (!r.ok()) return r.status();
  Attributes out;
  for (const wire::TlvRecord& rec : r->records()) {
    const Bytes& v = rec.value;
    if (rec.tag != kAttributeTag || v.empty() || v.size() < 2u + v[0]) {
      return absl::InvalidArgumentError("malformed attribute record");
    }
    AttributeValue a;
    a.name = ToString(ByteSpan(v).subspan(1, v[0]));
    size_t pos = 1 + v[0];
    uint8_t type = v[pos++];
    size_t rest = v.size() - pos;
    if (type == kTypeNull && rest == 0) {
      a.value = Null{};
    } else if (type == kTypeInt && rest == 8) {
      a.value = static_cast<int64_t>(ReadUint(v, pos, 8));
    } else if (type == kTypeBool && rest == 1 && v[pos] <= 1) {
      a.value = v[pos] == 1;
    } else {
      return absl::InvalidArgumentError("malformed attribute value");
    }
    if (!ValidAttributeName(a.name) ||
        (!out.empty() && out.back().name >= a.name)) {
      return absl::InvalidArgumentError("attributes not canonical");
    }
    out.push_back(std::move(a));
  }
  return out;
}

absl::StatusOr<Attributes> ParseAttributes(const std::string& text) {
  Attributes out;
  std::set<std::string> seen;
  for (const Piece& p : SplitTopLevel(text, 1, ',')) {
    if (p.text.empty()) continue;
    size_t eq = p.text.find('=');
    if (eq == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute '", p.text, "' needs name=value"));
    }
    AttributeValue a{Trim(p.text.substr(0, eq)), Null{}};
    std::string value = Trim(p.text.substr(eq + 1));
    int64_t n;
    if (value == "true" || value == "false") {
      a.value = value == "true";
    } else if (value == "null") {
      a.value = Null{};
    } else if (ParseInt(value, n)) {
      a.value = n;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("bad attribute value '", value, "'"));
    }
    if (!ValidAttributeName(a.name) || !seen.insert(a.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad or repeated attribute name '", a.name, "'"));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string RenderAttributes(const Attributes& attrs) {
  std::string out;
  for (const AttributeValue& a : attrs) {
    if (!out.empty()) out += ",";
    out += a.name + "=";
    if (const int64_t* n = std::get_if<int64_t>(&a.value)) {
      out += std::to_string(*n);
    } else if (const bool* b = std::get_if<bool>(&a.value)) {
      out += *b ? "true" : "false";
    } else {
      out += "null";
    }
  }
  return out;
}

std::string Constraint::Render() const {
  std::string prefix = optional ? "?" : "";
  switch (kind) {
    case Kind::kTime:
      return absl::StrCat("time(", start, ", ",
                          stop == kForever ? std::string("inf")
                                           : std::to_string(stop),
                          ")");
    case Kind::kFlag:
      return absl::StrCat(prefix, "flag(", attribute, ")");
    case Kind::kRange:
      return absl::StrCat(prefix, "range(", attribute, ", ", lo, ", ", hi,
                          ")");
  }
  return "";
}

std::string DenyReasonName(DenyReason r) {
  switch (r) {
    case DenyReason::kNone:
      return "none";
    case DenyReason::kUnknownRole:
      return "unknown-role";
    case DenyReason::kUnknownObject:
      return "unknown-object";
    case DenyReason::kNotGranted:
      return "not-granted";
    case DenyReason::kAttribute:
      return "attribute";
  }
  return "?";
}

absl::StatusOr<PermissionTable> PermissionTable::Load(
    const std::string& document) {
  PermissionTable t;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= document.size()) {
    size_t nl = document.find('\n', pos);
    if (nl == std::string::npos) nl = document.size();
    std::string line = document.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t indent = 0;
    while (indent < line.size() &&
           std::isspace(static_cast<unsigned char>(line[indent]))) {
      ++indent;
    }
    const std::string body = Trim(line);
    if (body.empty()) continue;
    const size_t col = indent + 1;

    if (body.rfind("role ", 0) == 0) {
      std::string rest = Trim(body.substr(5));
      bool root = false;
      if (rest.size() > 5 && rest.compare(rest.size() - 5, 5, " root") == 0) {
        root = true;
        rest = Trim(rest.substr(0, rest.size() - 5));
      }
      if (!ValidAttributeName(rest)) {
        return LineError(line_no, col + 5, "bad role name");
      }
      if (t.HasRole(rest)) {
        return LineError(line_no, col + 5,
                         absl::StrCat("duplicate role '", rest, "'"));
      }
      if (root) {
        if (t.root_) return LineError(line_no, col, "second root role");
        t.root_ = rest;
      }
      t.roles_.push_back(rest);
      continue;
    }
    if (body.rfind("object ", 0) == 0) {
      std::string rest = Trim(body.substr(7));
      size_t slash = rest.find('/');
      if (slash == std::string::npos) {
        return LineError(line_no, col + 7, "object needs <Macro>/<Name>");
      }
      absl::StatusOr<Macro> macro = ParseMacro(Trim(rest.substr(0, slash)));
      if (!macro.ok()) {
        return LineError(line_no, col + 7,
                         std::string(macro.status().message()));
      }
      std::string name = Trim(rest.substr(slash + 1));
      if (name.empty() || name[0] == '@' ||
          name.find(';') != std::string::npos) {
        return LineError(line_no, col + 7 + slash + 1, "bad object name");
      }
      if (t.FindObject(name) != nullptr) {
        return LineError(line_no, col + 7,
                         absl::StrCat("duplicate object '", name, "'"));
      }
      t.objects_.push_back({name, *macro});
      continue;
    }

    std::vector<Piece> parts = SplitTopLevel(body, col, ';');
    if (parts.size() < 3 || parts.size() > 4) {
      return LineError(line_no, col,
                       "entry needs role; object; rights[; constraints]");
    }
    const Piece& role = parts[0];
    const Piece& target = parts[1];
    if (!t.HasRole(role.text)) {
      return LineError(line_no, role.column,
                       absl::StrCat("unknown role '", role.text, "'"));
    }
    std::string key;
    if (!target.text.empty() && target.text[0] == '@') {
      absl::StatusOr<Macro> macro = ParseMacro(target.text.substr(1));
      if (!macro.ok()) {
        return LineError(line_no, target.column,
                         std::string(macro.status().message()));
      }
      key = MacroKey(*macro);
    } else {
      if (t.FindObject(target.text) == nullptr) {
        return LineError(line_no, target.column,
                         absl::StrCat("unknown object '", target.text, "'"));
      }
      key = target.text;
    }
    Entry entry;
    absl::StatusOr<ActionSet> actions = ActionSet::Parse(parts[2].text);
    if (!actions.ok()) {
      return LineError(line_no, parts[2].column,
                       std::string(actions.status().message()));
    }
    entry.actions = *actions;
    if (parts.size() == 4) {
      for (const Piece& p :
           SplitTopLevel(parts[3].text, parts[3].column, ',')) {
        absl::StatusOr<Constraint> c = ParseConstraint(p.text);
        if (!c.ok()) {
          return LineError(line_no, p.column,
                           std::string(c.status().message()));
        }
        entry.constraints.push_back(*c);
      }
    }
    if (!t.entries_.emplace(std::make_pair(role.text, key), entry).second) {
      return LineError(line_no, col,
                       absl::StrCat("duplicate entry for (", role.text, ", ",
                                    target.text, ")"));
    }
  }
  return t;
}

bool PermissionTable::HasRole(const std::string& role) const {
  return std::find(roles_.begin(), roles_.end(), role) != roles_.end();
}

const ObjectInfo* PermissionTable::FindObject(const std::string& name) const {
  for (const ObjectInfo& o : objects_) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

const Entry* PermissionTable::Lookup(const std::string& role,
                                     const std::string& object) const {
  const ObjectInfo* info = FindObject(object);
  if (info == nullptr) return nullptr;
  auto it = entries_.find({role, object});
  if (it != entries_.end()) return &it->second;
  it = entries_.find({role, MacroKey(info->macro)});
  if (it != entries_.end()) return &it->second;
  return nullptr;
}

ActionSet PermissionTable::Rights(const std::string& role,
                                  const std::string& object) const {
  const Entry* e = Lookup(role, object);
  return e == nullptr ? ActionSet{} : e->actions;
}

Decision PermissionTable::Check(const std::string& role,
                                const std::string& object, Action action,
                                const Attributes& attributes,
                                uint64_t now) const {
  if (!HasRole(role)) {
    return {false, DenyReason::kUnknownRole, role};
  }
  if (FindObject(object) == nullptr) {
    return {false, DenyReason::kUnknownObject, object};
  }
  const Entry* e = Lookup(role, object);
  if (e == nullptr || !e->actions.Has(action)) {
    return {false, DenyReason::kNotGranted,
            absl::StrCat(role, " lacks '", std::string(1, ActionChar(action)),
                         "' on ", object)};
  }
  for (const Constraint& c : e->constraints) {
    std::string why = Evaluate(c, attributes, now);
    if (!why.empty()) return {false, DenyReason::kAttribute, why};
  }
  return {true, DenyReason::kNone, ""};
}

std::string PermissionTable::ToDocument(bool expand_macros) const {
  std::string out;
  for (const std::string& r : roles_) {
    absl::StrAppend(&out, "role ", r, root_ == r ? " root" : "", "\n");
  }
  for (const ObjectInfo& o : objects_) {
    absl::StrAppend(&out, "object ", MacroName(o.macro), "/", o.name, "\n");
  }
  for (const auto& [key, entry] : entries_) {
    const auto& [role, target] = key;
    if (!expand_macros || target[0] != '@') {
      absl::StrAppend(&out, RenderEntry(role, target, entry), "\n");
      continue;
    }
    for (const ObjectInfo& o : objects_) {
      if (MacroKey(o.macro) != target) continue;
      if (entries_.count({role, o.name}) != 0) continue;
      absl::StrAppend(&out, RenderEntry(role, o.name, entry), "\n");
    }
  }
  return out;
}

absl::StatusOr<std::string> ValidateVin(const std::string& text) {
  if (text.size() != 17) {
    return absl::InvalidArgumentError(
        absl::StrCat("VIN must be 17 characters, got ", text.size()));
  }
  std::string out;
  for (char c : text) {
    char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    bool ok = (u >= '0' && u <= '9') ||
              (u >= 'A' && u <= 'Z' && u != 'I' && u != 'O' && u != 'Q');
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("VIN character '", std::string(1, c),
                       "' not allowed"));
    }
    out.push_back(u);
  }
  return out;
}

}  // namespace carsec::policy
