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


#include "carsec/sim/scenario.h"

#include <charconv>
#include <map>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace carsec::sim {
namespace {

using protocol::Command;
using wire::Procedure;
using wire::Tag;

struct Token {
  std::string text;
  int col;
};

absl::StatusOr<std::vector<Token>> Tokenize(std::string_view line, int n) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    int col = static_cast<int>(i) + 1;
    if (c == '"') {
      size_t end = line.find('"', i + 1);
      if (end == std::string_view::npos) {
        return absl::InvalidArgumentError(
            absl::StrCat(n, ":", col, ": unterminated quote"));
      }
      out.push_back({std::string(line.substr(i + 1, end - i - 1)), col});
      i = end + 1;
      continue;
    }
    size_t end = i;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' &&
           line[end] != '\r' && line[end] != '#') {
      ++end;
    }
    out.push_back({std::string(line.substr(i, end - i)), col});
    i = end;
  }
  return out;
}

// Cursor over one line's tokens. The first failure is kept; after it the
// line reads as exhausted and accessors return empty values.
class Line {
 public:
  Line(int n, std::vector<Token> tokens, int eol)
      : n_(n), tokens_(std::move(tokens)), eol_(eol) {}

  int number() const { return n_; }
  bool failed() const { return !status_.ok(); }
  const absl::Status& status() const { return status_; }
  bool done() const { return failed() || i_ == tokens_.size(); }
  int col() const { return i_ == tokens_.size() ? eol_ : tokens_[i_].col; }
  const std::string& Peek() const { return tokens_[i_].text; }

  void Fail(const std::string& message) { FailAt(col(), message); }
  void FailAt(int col, const std::string& message) {
    if (failed()) return;
    status_ = absl::InvalidArgumentError(
        absl::StrCat(n_, ":", col, ": ", message));
  }

  std::string Word(const char* what) {
    if (done()) {
      Fail(absl::StrCat("expected ", what));
      return "";
    }
    return tokens_[i_++].text;
  }
  template <typename T>
  T Number(const char* what) {
    int at = col();
    std::string w = Word(what);
    T v{};
    if (failed()) return v;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size()) {
      FailAt(at, absl::StrCat("expected ", what, ", got '", w, "'"));
      return T{};
    }
    return v;
  }
  bool Accept(const char* word) {
    if (done() || Peek() != word) return false;
    ++i_;
    return true;
  }
  void End() {
    if (!done()) Fail(absl::StrCat("unexpected '", Peek(), "'"));
  }

 private:
  int n_;
  std::vector<Token> tokens_;
  int eol_;
  size_t i_ = 0;
  absl::Status status_;
};

Procedure ParseProcedureName(Line& l) {
  int at = l.col();
  std::string w = l.Word("procedure");
  for (int p = 1; p <= wire::kProcedureCount; ++p) {
    if (wire::ProcedureName(static_cast<Procedure>(p)) == w) {
      return static_cast<Procedure>(p);
    }
  }
  l.FailAt(at, absl::StrCat("unknown procedure '", w, "'"));
  return Procedure::kExecute;
}

int ParseStep(Line& l, Procedure p) {
  int at = l.col();
  int step = l.Number<int>("step");
  if (step < 1 || step > wire::StepCount(p)) {
    l.FailAt(at, absl::StrCat(wire::ProcedureName(p), " has no step ", step));
  }
  return step;
}

Command ParseCommand(Line& l) {
  std::string object = l.Word("object");
  if (object == "open") object = "Open Doors";
  if (object == "start") object = "Start Engine";
  Command c{object, policy::Action::kExecute};
  if (!l.done()) {
    int at = l.col();
    std::string a = l.Word("action");
    absl::StatusOr<policy::Action> act =
        a.size() == 1 ? policy::ParseAction(a[0])
                      : absl::InvalidArgumentError("");
    if (act.ok()) {
      c.action = *act;
    } else {
      l.FailAt(at, absl::StrCat("bad action '", a, "'"));
    }
  }
  return c;
}

ChannelSpec ParseChannelOptions(Line& l, ChannelSpec spec) {
  while (!l.done()) {
    if (l.Accept("trusted")) {
      spec.trusted = true;
    } else if (l.Accept("mtu")) {
      int at = l.col();
      spec.mtu = l.Number<size_t>("mtu");
      if (spec.mtu != 0 && spec.mtu < wire::kMinMtu) {
        l.FailAt(at, absl::StrCat("mtu below ", wire::kMinMtu));
      }
    } else if (l.Accept("latency")) {
      spec.latency = l.Number<uint64_t>("latency");
    } else {
      l.Fail(absl::StrCat("unknown channel option '", l.Peek(), "'"));
    }
  }
  return spec;
}

Strategy ParseStrategy(Line& l) {
  static const std::map<std::string, StrategyKind> kKinds = {
      {"passive", StrategyKind::kPassive},
      {"drop", StrategyKind::kDrop},
      {"replay", StrategyKind::kReplay},
      {"splice", StrategyKind::kSplice},
      {"mutate", StrategyKind::kMutate},
      {"leak-kses", StrategyKind::kLeakKses},
      {"hijack", StrategyKind::kHijack}};
  int at = l.col();
  std::string w = l.Word("strategy");
  auto it = kKinds.find(w);
  Strategy s;
  if (it == kKinds.end()) {
    l.FailAt(at, absl::StrCat("unknown strategy '", w, "'"));
    return s;
  }
  s.kind = it->second;
  switch (s.kind) {
    case StrategyKind::kPassive:
      break;
    case StrategyKind::kDrop:
    case StrategyKind::kReplay:
    case StrategyKind::kSplice:
    case StrategyKind::kMutate: {
      s.procedure = ParseProcedureName(l);
      s.step = ParseStep(l, s.procedure);
      if (s.kind != StrategyKind::kMutate) break;
      int fat = l.col();
      std::string f = l.Word("field");
      if (f == "auth") break;
      for (int t = 1; t <= static_cast<int>(Tag::kEcho); ++t) {
        if (wire::TagName(static_cast<Tag>(t)) == f)
          s.field = static_cast<Tag>(t);
      }
      if (!s.field) l.FailAt(fat, absl::StrCat("unknown field '", f, "'"));
      break;
    }
    case StrategyKind::kLeakKses:
    case StrategyKind::kHijack:
      if (!l.done()) s.command = ParseCommand(l);
      break;
  }
  l.End();
  return s;
}

Step ParseStepLine(Line& l, StepKind kind) {
  Step s;
  s.kind = kind;
  s.line = l.number();
  auto actor = [&](const char* what) {
    s.actor_cols.push_back(l.col());
    s.actors.push_back(l.Word(what));
  };
  switch (kind) {
    case StepKind::kSetup:
      actor("manufacturer");
      actor("car");
      break;
    case StepKind::kSetRoot:
      actor("seller");
      actor("owner");
      actor("car");
      break;
    case StepKind::kUpload:
      actor("owner");
      actor("car");
      s.role = l.Word("role");
      break;
    case StepKind::kDelegate: {
      actor("owner");
      actor("user");
      s.role = l.Word("role");
      int at = l.col();
      absl::StatusOr<protocol::DelegationKind> k =
          protocol::ParseDelegationKind(l.Word("delegation kind"));
      if (!k.ok()) {
        l.FailAt(at, "expected persistent or ephemeral");
        break;
      }
      s.delegation = *k;
      while (!l.done()) {
        if (l.Accept("for")) {
          s.duration = l.Number<uint64_t>("seconds");
        } else if (l.Accept("attrs")) {
          int aat = l.col();
          absl::StatusOr<policy::Attributes> a =
              policy::ParseAttributes(l.Word("attribute list"));
          if (a.ok()) {
            s.attributes = *a;
          } else {
            l.FailAt(aat, std::string(a.status().message()));
          }
        } else {
          l.Fail(absl::StrCat("unexpected '", l.Peek(), "'"));
        }
      }
      break;
    }
    case StepKind::kExecute:
      actor("user");
      actor("car");
      s.role = l.Word("role");
      s.command = ParseCommand(l);
      break;
    case StepKind::kOtf:
      actor("user");
      actor("car");
      s.command = ParseCommand(l);
      break;
    case StepKind::kAdvance:
      s.seconds = l.Number<int64_t>("seconds");
      if (s.seconds < 0) l.Fail("advance must not go backwards");
      break;
    case StepKind::kRevoke: {
      actor("authority");
      actor("car");
      int at = l.col();
      std::string t = l.Word("pseudonym or token");
      if (t == "pseudonym") {
        s.target = protocol::RevocationTarget::kPseudonym;
      } else if (t == "token") {
        s.target = protocol::RevocationTarget::kTokenDigest;
      } else {
        l.FailAt(at, "expected pseudonym or token");
      }
      actor("user");
      break;
    }
    case StepKind::kClock:
      actor("actor");
      s.seconds = l.Number<int64_t>("offset");
      break;
  }
  l.End();
  return s;
}

const std::map<std::string, StepKind>& StepKeywords() {
  static const auto* k = new std::map<std::string, StepKind>{
      {"setup", StepKind::kSetup},     {"set-root", StepKind::kSetRoot},
      {"upload", StepKind::kUpload},   {"delegate", StepKind::kDelegate},
      {"execute", StepKind::kExecute}, {"otf", StepKind::kOtf},
      {"advance", StepKind::kAdvance}, {"revoke", StepKind::kRevoke},
      {"clock", StepKind::kClock}};
  return *k;
}

const std::map<std::string, ActorKind>& ActorKeywords() {
  static const auto* k = new std::map<std::string, ActorKind>{
      {"manufacturer", ActorKind::kManufacturer},
      {"seller", ActorKind::kSeller},
      {"owner", ActorKind::kOwner},
      {"car", ActorKind::kCar},
      {"user", ActorKind::kUser}};
  return *k;
}

void ParseLine(Line& l, Scenario& sc) {
  int at = l.col();
  std::string kw = l.Word("keyword");
  if (kw == "seed") {
    sc.seed = l.Number<uint64_t>("seed");
  } else if (kw == "ibs") {
    int sat = l.col();
    std::string s = l.Word("scheme");
    if (s == "shamir") {
      sc.scheme = ibs::Scheme::kShamir;
    } else if (s == "gq") {
      sc.scheme = ibs::Scheme::kGq;
    } else {
      l.FailAt(sat, "expected shamir or gq");
    }
    int bat = l.col();
    sc.modulus_bits = l.Number<int>("modulus bits");
    if (sc.modulus_bits < 256) l.FailAt(bat, "modulus below 256 bits");
  } else if (kw == "groupsig") {
    int bat = l.col();
    std::string b = l.Word("backend");
    if (b == "reference") {
      sc.backend = groupsig::Backend::kReference;
    } else if (b == "ring") {
      sc.backend = groupsig::Backend::kRing;
    } else {
      l.FailAt(bat, "expected reference or ring");
    }
  } else if (kw == "group-size") {
    int gat = l.col();
    sc.group_size = l.Number<uint32_t>("group size");
    if (sc.group_size == 0) l.FailAt(gat, "group size must be positive");
  } else if (kw == "kem") {
    int kat = l.col();
    std::string k = l.Word("kem");
    if (k == "dh") {
      sc.kem = crypto::KemKind::kDh;
    } else if (k == "rsa") {
      sc.kem = crypto::KemKind::kRsa;
    } else {
      l.FailAt(kat, "expected dh or rsa");
    }
  } else if (auto a = ActorKeywords().find(kw); a != ActorKeywords().end()) {
    int nat = l.col();
    ActorDecl d{a->second, l.Word("name"), "", l.number()};
    if (sc.Find(d.name))
      l.FailAt(nat, absl::StrCat("'", d.name, "' redeclared"));
    if (d.kind == ActorKind::kCar) {
      int vat = l.col();
      absl::StatusOr<std::string> vin = policy::ValidateVin(l.Word("VIN"));
      if (!vin.ok()) {
        l.FailAt(vat, std::string(vin.status().message()));
        return;
      }
      d.vin = *vin;
    }
    sc.actors.push_back(std::move(d));
  } else if (kw == "channel") {
    ChannelDecl c;
    c.line = l.number();
    c.col_a = l.col();
    c.a = l.Word("endpoint");
    c.col_b = l.col();
    c.b = l.Word("endpoint");
    c.spec = ParseChannelOptions(l, sc.default_channel);
    sc.channels.push_back(std::move(c));
  } else if (kw == "default-channel") {
    sc.default_channel = ParseChannelOptions(l, ChannelSpec{});
  } else if (kw == "strategy") {
    sc.strategy = ParseStrategy(l);
  } else if (kw == "expect") {
    int eat = l.col();
    std::string e = l.Word("safe or attack");
    if (e == "safe") {
      sc.expect = Expectation::kSafe;
    } else if (e == "attack") {
      sc.expect = Expectation::kAttack;
    } else {
      l.FailAt(eat, "expected safe or attack");
    }
  } else if (auto s = StepKeywords().find(kw); s != StepKeywords().end()) {
    sc.steps.push_back(ParseStepLine(l, s->second));
  } else {
    l.FailAt(at, absl::StrCat("unknown keyword '", kw, "'"));
  }
  l.End();
}

// Required kinds of each step's actor operands; nullopt accepts any.
std::vector<std::optional<ActorKind>> OperandKinds(StepKind kind) {
  using K = ActorKind;
  switch (kind) {
    case StepKind::kSetup:
      return {K::kManufacturer, K::kCar};
    case StepKind::kSetRoot:
      return {K::kSeller, K::kOwner, K::kCar};
    case StepKind::kUpload:
      return {K::kOwner, K::kCar};
    case StepKind::kDelegate:
      return {K::kOwner, K::kUser};
    case StepKind::kExecute:
    case StepKind::kOtf:
      return {K::kUser, K::kCar};
    case StepKind::kAdvance:
      return {};
    case StepKind::kRevoke:
      return {std::nullopt, K::kCar, K::kUser};
    case StepKind::kClock:
      return {std::nullopt};
  }
  return {};
}

}  // namespace

std::string ActorKindName(ActorKind kind) {
  for (const auto& [name, k] : ActorKeywords()) {
    if (k == kind) return name;
  }
  return "?";
}

std::string StepKindName(StepKind kind) {
  for (const auto& [name, k] : StepKeywords()) {
    if (k == kind) return name;
  }
  return "?";
}

std::string RenderStrategy(const Strategy& s) {
  auto at = [&] {
    return absl::StrCat(wire::ProcedureName(s.procedure), " ", s.step);
  };
  auto cmd = [&] {
    return absl::StrCat("\"", s.command.object, "\" ",
                        std::string(1, policy::ActionChar(s.command.action)));
  };
  switch (s.kind) {
    case StrategyKind::kPassive:
      return "passive";
    case StrategyKind::kDrop:
      return absl::StrCat("drop ", at());
    case StrategyKind::kReplay:
      return absl::StrCat("replay ", at());
    case StrategyKind::kSplice:
      return absl::StrCat("splice ", at());
    case StrategyKind::kMutate:
      return absl::StrCat("mutate ", at(), " ",
                          s.field ? wire::TagName(*s.field) : "auth");
    case StrategyKind::kLeakKses:
      return absl::StrCat("leak-kses ", cmd());
    case StrategyKind::kHijack:
      return absl::StrCat("hijack ", cmd());
  }
  return "?";
}

const ActorDecl* Scenario::Find(const std::string& name) const {
  for (const ActorDecl& a : actors) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

absl::Status Validate(const Scenario& sc) {
  auto error = [](int line, int col, const std::string& message) {
    return absl::InvalidArgumentError(absl::StrCat(line, ":", col, ": ",
                                                   message));
  };
  for (const ChannelDecl& c : sc.channels) {
    if (!sc.Find(c.a)) {
      return error(c.line, c.col_a, "undefined actor '" + c.a + "'");
    }
    if (!sc.Find(c.b)) {
      return error(c.line, c.col_b, "undefined actor '" + c.b + "'");
    }
  }
  for (const Step& s : sc.steps) {
    std::vector<std::optional<ActorKind>> kinds = OperandKinds(s.kind);
    if (kinds.size() != s.actors.size()) {
      return error(s.line, 1, "wrong operand count");
    }
    for (size_t i = 0; i < kinds.size(); ++i) {
      int col = i < s.actor_cols.size() ? s.actor_cols[i] : 1;
      const ActorDecl* d = sc.Find(s.actors[i]);
      if (!d) {
        return error(s.line, col, "undefined actor '" + s.actors[i] + "'");
      }
      if (kinds[i] && d->kind != *kinds[i]) {
        return error(s.line, col,
                     absl::StrCat("'", s.actors[i], "' is declared as ",
                                  ActorKindName(d->kind), ", expected ",
                                  ActorKindName(*kinds[i])));
      }
      if (s.kind == StepKind::kRevoke && i == 0 &&
          d->kind != ActorKind::kOwner && d->kind != ActorKind::kUser) {
        return error(s.line, col,
                     "revocation authority must be an owner or a user");
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Scenario> ParseScenario(std::string_view text) {
  Scenario sc;
  int n = 0;
  for (absl::string_view raw : absl::StrSplit(
           absl::string_view(text.data(), text.size()), '\n')) {
    ++n;
    absl::StatusOr<std::vector<Token>> tokens =
        Tokenize(std::string_view(raw.data(), raw.size()), n);
    if (!tokens.ok()) return tokens.status();
    if (tokens->empty()) continue;
    Line l(n, *std::move(tokens), static_cast<int>(raw.size()) + 1);
    ParseLine(l, sc);
    if (l.failed()) return l.status();
  }
  if (absl::Status s = Validate(sc); !s.ok()) return s;
  return sc;
}

}  // namespace carsec::sim
