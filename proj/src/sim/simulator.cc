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


#include "carsec/sim/simulator.h"

#include <algorithm>
#include <chrono>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "carsec/crypto/symmetric.h"
#include "carsec/wire/chunk.h"

namespace carsec::sim {
namespace {

using protocol::Actor;
using protocol::Envelope;
using wire::Message;
using wire::Procedure;
using wire::Tag;

constexpr size_t kUnboundedMtu = 0xffff + wire::kChunkHeaderSize;
constexpr char kRootRole[] = "Owner";

std::string Label(const Message& m) {
  return absl::StrCat(wire::ProcedureName(m.procedure), "/", m.step);
}

std::string Label(ByteSpan bytes) {
  absl::StatusOr<Message> m = wire::Decode(bytes);
  return m.ok() ? Label(*m) : "?";
}

Bytes Trunc(ByteSpan sig) {
  ibs::TruncatedSignature t = ibs::Truncate64(sig);
  return Bytes(t.begin(), t.end());
}

void SignMac(ByteSpan key, Message& m) {
  crypto::SymmetricKey k = *crypto::SymmetricKey::FromBytes(key);
  m.auth_kind = wire::AuthKind::kMac;
  crypto::MacTag tag = crypto::MacSign(k, wire::SignedPortion(m));
  m.auth.assign(tag.begin(), tag.end());
}

bool VerifyMac(ByteSpan key, const Message& m) {
  crypto::SymmetricKey k = *crypto::SymmetricKey::FromBytes(key);
  return m.auth_kind == wire::AuthKind::kMac &&
         crypto::MacVerify(k, wire::SignedPortion(m), m.auth);
}

}  // namespace

bool Result::Passed(Expectation expect) const {
  return expect == Expectation::kSafe ? !attack_found() : attack_found();
}

std::string Result::TranscriptText() const {
  std::string out = absl::StrJoin(transcript, "\n");
  out.push_back('\n');
  return out;
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)),
      rng_(scenario_.seed),
      adversary_rng_(rng_.Fork("adversary")) {}

absl::StatusOr<std::unique_ptr<Simulator>> Simulator::Create(
    Scenario scenario) {
  if (absl::Status s = Validate(scenario); !s.ok()) return s;
  std::unique_ptr<Simulator> sim(new Simulator(std::move(scenario)));
  if (absl::Status s = sim->Init(); !s.ok()) return s;
  return sim;
}

absl::Status Simulator::Init() {
  crypto::DeterministicRng ibs_rng = rng_.Fork("ibs");
  ibs::SetupOptions opt;
  opt.scheme = scenario_.scheme;
  opt.modulus_bits = scenario_.modulus_bits;
  absl::StatusOr<ibs::MasterKey> msk = ibs::Setup(opt, ibs_rng);
  if (!msk.ok()) return msk.status();
  deployment_.ibs = msk->params;
  deployment_.backend = scenario_.backend;
  deployment_.kem = scenario_.kem;
  deployment_.group_size = scenario_.group_size;

  for (const ActorDecl& d : scenario_.actors) {
    uint64_t seed = rng_.Fork(absl::StrCat("actor:", d.name)).NextU64();
    std::unique_ptr<Actor> a;
    if (d.kind == ActorKind::kCar) {
      absl::StatusOr<ibs::UserKey> k = ibs::KeyDer(*msk, ToBytes(d.vin));
      if (!k.ok()) return k.status();
      car_keys_.emplace(d.name, *std::move(k));
      a = std::make_unique<protocol::Car>(d.name, deployment_, seed);
    } else {
      absl::StatusOr<ibs::UserKey> k = ibs::KeyDer(*msk, ToBytes(d.name));
      if (!k.ok()) return k.status();
      switch (d.kind) {
        case ActorKind::kManufacturer:
          a = std::make_unique<protocol::Manufacturer>(d.name, deployment_,
                                                       seed, *std::move(k));
          break;
        case ActorKind::kSeller:
          a = std::make_unique<protocol::Seller>(d.name, deployment_, seed,
                                                 *std::move(k));
          break;
        case ActorKind::kOwner:
          a = std::make_unique<protocol::Owner>(d.name, deployment_, seed,
                                                *std::move(k), kRootRole);
          break;
        case ActorKind::kUser:
          a = std::make_unique<protocol::User>(d.name, deployment_, seed,
                                               *std::move(k));
          break;
        case ActorKind::kCar:
          break;
      }
    }
    actors_.emplace(d.name, std::move(a));
  }
  return absl::OkStatus();
}

const protocol::Car* Simulator::car(const std::string& name) const {
  auto it = actors_.find(name);
  return it == actors_.end()
             ? nullptr
             : dynamic_cast<const protocol::Car*>(it->second.get());
}

const protocol::User* Simulator::user(const std::string& name) const {
  auto it = actors_.find(name);
  return it == actors_.end()
             ? nullptr
             : dynamic_cast<const protocol::User*>(it->second.get());
}

const protocol::Owner* Simulator::owner(const std::string& name) const {
  auto it = actors_.find(name);
  return it == actors_.end()
             ? nullptr
             : dynamic_cast<const protocol::Owner*>(it->second.get());
}

std::vector<ActionRecord> Simulator::Executed() const {
  std::vector<ActionRecord> out;
  for (const auto& [name, a] : actors_) {
    const auto* c = dynamic_cast<const protocol::Car*>(a.get());
    if (!c) continue;
    for (const protocol::ExecutedAction& e : c->executed()) {
      out.push_back({name, e.role, e.command});
    }
  }
  return out;
}

ChannelSpec Simulator::Channel(const std::string& a,
                               const std::string& b) const {
  ChannelSpec spec = scenario_.default_channel;
  for (const ChannelDecl& c : scenario_.channels) {
    if ((c.a == a && c.b == b) || (c.a == b && c.b == a)) spec = c.spec;
  }
  return spec;
}

uint64_t Simulator::Now(const std::string& actor) const {
  auto it = offsets_.find(actor);
  int64_t offset = it == offsets_.end() ? 0 : it->second;
  return kEpoch + tick_ / kTicksPerSecond + advanced_ + offset;
}

void Simulator::Log(std::string line) {
  result_.transcript.push_back(
      absl::StrFormat("%06d %s", tick_, std::move(line)));
}

void Simulator::LogNewEvents() {
  for (const auto& [name, a] : actors_) {
    size_t& seen = seen_aborts_[name];
    for (; seen < a->aborts().size(); ++seen) {
      const protocol::Abort& ab = a->aborts()[seen];
      Log(absl::StrCat("abort ", name, " ", wire::ProcedureName(ab.procedure),
                       "/", ab.step, " conn=", ab.conn, " ",
                       protocol::ReasonName(ab.reason),
                       ab.detail.empty() ? "" : " ", ab.detail));
    }
    const auto* c = dynamic_cast<const protocol::Car*>(a.get());
    if (!c) continue;
    size_t& done = seen_executed_[name];
    for (; done < c->executed().size(); ++done) {
      const protocol::ExecutedAction& e = c->executed()[done];
      Log(absl::StrCat("exec ", name, " ", wire::ProcedureName(e.procedure),
                       " role=", e.role, " ",
                       protocol::RenderCommand(e.command)));
    }
  }
}

void Simulator::Enqueue(const std::string& from, const std::string& to,
                        uint64_t conn, ByteSpan message, bool forged) {
  ChannelSpec spec = Channel(from, to);
  absl::StatusOr<std::vector<wire::Chunk>> chunks =
      wire::Split(message, spec.mtu == 0 ? kUnboundedMtu : spec.mtu);
  if (!chunks.ok()) {
    Log(absl::StrCat("unsendable ", from, "->", to, " conn=", conn, " ",
                     chunks.status().message()));
    return;
  }
  std::string label = Label(message);
  for (const wire::Chunk& c : *chunks) {
    queue_.push_back(Frame{tick_ + spec.latency, from, to, conn, spec.trusted,
                           forged, label, wire::EncodeChunk(c)});
  }
}

void Simulator::Start(const Envelope& first, bool forged) {
  absl::StatusOr<Bytes> bytes = wire::Encode(first.msg);
  if (!bytes.ok()) {
    Log(absl::StrCat("unencodable ", Label(first.msg), " ",
                     bytes.status().message()));
    return;
  }
  Enqueue(first.from, first.to, first.conn, *bytes, forged);
  Pump();
}

void Simulator::Pump() {
  while (!queue_.empty()) {
    ++tick_;
    auto next = std::min_element(
        queue_.begin(), queue_.end(),
        [](const Frame& a, const Frame& b) { return a.ready < b.ready; });
    if (next->ready > tick_) tick_ = next->ready;
    Frame f = std::move(*next);
    queue_.erase(next);
    Deliver(f);
  }
}

void Simulator::Deliver(const Frame& f) {
  if (!f.trusted && !f.forged) {
    Intercept(f);
    return;
  }
  absl::StatusOr<wire::Chunk> chunk = wire::DecodeChunk(f.bytes);
  Log(absl::StrCat("deliver ", f.from, "->", f.to, " conn=", f.conn, " ",
                   f.label, " ",
                   chunk.ok() ? absl::StrCat(chunk->seq + 1, "/", chunk->total)
                              : "?",
                   f.trusted ? " trusted " : " ", ToHex(f.bytes)));
  auto it = actors_.find(f.to);
  if (it == actors_.end()) return;
  if (!chunk.ok()) {
    it->second->NoteMalformed(f.conn, Now(f.to), "chunk");
    LogNewEvents();
    return;
  }
  std::vector<wire::Chunk>& buf = at_destination_[{f.from, f.to, f.conn}];
  buf.push_back(*std::move(chunk));
  if (buf.size() < buf.front().total) return;
  absl::StatusOr<Bytes> msg = wire::Reassemble(buf);
  buf.clear();
  if (!msg.ok()) {
    it->second->NoteMalformed(f.conn, Now(f.to), "reassembly");
    LogNewEvents();
    return;
  }
  DeliverMessage(f.from, f.to, f.conn, f.trusted, *msg);
}

void Simulator::DeliverMessage(const std::string& from, const std::string& to,
                               uint64_t conn, bool trusted, ByteSpan bytes) {
  Actor* a = actors_.at(to).get();
  absl::StatusOr<Message> msg = wire::Decode(bytes);
  if (!msg.ok()) {
    a->NoteMalformed(conn, Now(to), std::string(msg.status().message()));
    LogNewEvents();
    return;
  }
  std::vector<Envelope> out =
      a->Receive(Envelope{from, to, conn, trusted, *std::move(msg)}, Now(to));
  LogNewEvents();
  for (const Envelope& e : out) {
    absl::StatusOr<Bytes> b = wire::Encode(e.msg);
    if (b.ok()) Enqueue(e.from, e.to, e.conn, *b, false);
  }
}

void Simulator::Intercept(const Frame& f) {
  Log(absl::StrCat("intercept ", f.from, "->", f.to, " conn=", f.conn, " ",
                   f.label, " ", ToHex(f.bytes)));
  knowledge_.Add(f.bytes);
  absl::StatusOr<wire::Chunk> chunk = wire::DecodeChunk(f.bytes);
  if (!chunk.ok()) return;
  std::vector<wire::Chunk>& buf = at_adversary_[{f.from, f.to, f.conn}];
  buf.push_back(*std::move(chunk));
  if (buf.size() < buf.front().total) return;
  absl::StatusOr<Bytes> bytes = wire::Reassemble(buf);
  buf.clear();
  if (!bytes.ok()) return;
  absl::StatusOr<Message> msg = wire::Decode(*bytes);
  if (f.conn >= kAdversaryConnBase) {
    if (msg.ok()) OnAdversaryConn(*msg, f.conn);
    return;
  }
  if (!msg.ok()) {
    Enqueue(f.from, f.to, f.conn, *bytes, true);
    return;
  }
  observed_.push_back(Envelope{f.from, f.to, f.conn, false, *msg});
  for (const Bytes& out : Apply(*msg, *bytes, f.conn)) {
    Enqueue(f.from, f.to, f.conn, out, true);
  }
}

std::vector<Bytes> Simulator::Apply(const Message& msg, const Bytes& bytes,
                                    uint64_t conn) {
  const Strategy& s = scenario_.strategy;
  const bool match = msg.procedure == s.procedure && msg.step == s.step &&
                     strategy_hits_ == 0;
  switch (s.kind) {
    case StrategyKind::kPassive:
    case StrategyKind::kLeakKses:
      return {bytes};
    case StrategyKind::kDrop:
      if (!match) return {bytes};
      ++strategy_hits_;
      Log(absl::StrCat("adversary drop ", Label(msg), " conn=", conn));
      return {};
    case StrategyKind::kReplay:
      if (!match) return {bytes};
      ++strategy_hits_;
      Log(absl::StrCat("adversary replay ", Label(msg), " conn=", conn));
      return {bytes, bytes};
    case StrategyKind::kSplice:
      if (msg.procedure != s.procedure || msg.step != s.step ||
          strategy_hits_ > 0) {
        return {bytes};
      }
      if (!splice_first_) {
        splice_first_ = bytes;
        return {bytes};
      }
      ++strategy_hits_;
      Log(absl::StrCat("adversary splice ", Label(msg), " conn=", conn));
      return {*splice_first_};
    case StrategyKind::kMutate: {
      if (!match) return {bytes};
      Message m = msg;
      Bytes* target = &m.auth;
      if (s.field) {
        target = nullptr;
        for (wire::Field& f : m.fields) {
          if (f.tag == *s.field) {
            target = &f.value;
            break;
          }
        }
        if (!target) return {bytes};
      }
      if (target->empty()) {
        *target = {0x01};
      } else {
        uint64_t bit = adversary_rng_.Uniform(target->size() * 8);
        (*target)[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
      }
      absl::StatusOr<Bytes> out = wire::Encode(m);
      if (!out.ok()) return {bytes};
      ++strategy_hits_;
      Log(absl::StrCat("adversary mutate ", Label(msg), " ",
                       s.field ? wire::TagName(*s.field) : "auth",
                       " conn=", conn));
      return {*std::move(out)};
    }
    case StrategyKind::kHijack: {
      if (msg.procedure != Procedure::kExecute || strategy_hits_ > 0) {
        return {bytes};
      }
      if (msg.step == 2) {
        challenges_.insert_or_assign(conn, msg);
        return {bytes};
      }
      auto ch = challenges_.find(conn);
      if (msg.step != 3 || ch == challenges_.end()) return {bytes};
      // Answer the car's challenge with a key and command of our own; the
      // truncated car signature is public.
      absl::StatusOr<crypto::Encapsulation> enc = crypto::KemEncapsulate(
          *ch->second.Find(Tag::kEphemeralKey), adversary_rng_);
      if (!enc.ok()) return {bytes};
      Bytes plain = protocol::EncodeCommand(s.command);
      Append(plain, Trunc(ch->second.auth));
      Message forged;
      forged.procedure = Procedure::kExecute;
      forged.step = 3;
      forged.Add(Tag::kSessionId, *ch->second.Find(Tag::kSessionId))
          .Add(Tag::kKemCiphertext, enc->ciphertext)
          .Add(Tag::kSealedCommand,
               crypto::SymEncrypt(enc->shared, plain, adversary_rng_));
      SignMac(enc->shared.bytes(), forged);
      knowledge_.Add(enc->shared.bytes());
      ++strategy_hits_;
      Log(absl::StrCat("adversary hijack ", Label(msg), " conn=", conn, " ",
                       protocol::RenderCommand(s.command)));
      return {*wire::Encode(forged)};
    }
  }
  return {bytes};
}

void Simulator::AfterExecute(const std::string& user, const std::string& car) {
  if (scenario_.strategy.kind != StrategyKind::kLeakKses || leaked_) return;
  const protocol::User::Session* session =
      this->user(user)->session(car);
  if (!session) return;
  leaked_ = true;
  knowledge_.Add(session->kses.bytes());
  Log(absl::StrCat("adversary learns kses ", user, "@", car));
  // Find which observed session each known key opens.
  for (const Envelope& e : observed_) {
    if (e.msg.procedure != Procedure::kExecute || e.msg.step != 3) continue;
    for (const Bytes& key : knowledge_.keys()) {
      if (!VerifyMac(key, e.msg)) continue;
      const Bytes& sid = *e.msg.Find(Tag::kSessionId);
      uint64_t conn = ++adversary_conn_;
      forged_.emplace(conn, ForgedRun{e.from, e.to, sid, key});
      crypto::SymmetricKey k = *crypto::SymmetricKey::FromBytes(key);
      Message m;
      m.procedure = Procedure::kExecuteOtf;
      m.step = 1;
      m.Add(Tag::kSessionId, sid)
          .Add(Tag::kSealedCommand,
               crypto::SymEncrypt(
                   k, protocol::EncodeCommand(scenario_.strategy.command),
                   adversary_rng_));
      SignMac(key, m);
      ++strategy_hits_;
      Log(absl::StrCat("adversary inject ", Label(m), " as ", e.from,
                       " conn=", conn, " ",
                       protocol::RenderCommand(scenario_.strategy.command)));
      Enqueue(e.from, e.to, conn, *wire::Encode(m), true);
      Pump();
      return;
    }
  }
}

void Simulator::OnAdversaryConn(const Message& msg, uint64_t conn) {
  auto it = forged_.find(conn);
  if (it == forged_.end() || msg.procedure != Procedure::kExecuteOtf ||
      msg.step != 2 || !VerifyMac(it->second.kses, msg)) {
    return;
  }
  crypto::SymmetricKey k = *crypto::SymmetricKey::FromBytes(it->second.kses);
  crypto::MacTag echo = crypto::MacSign(k, msg.auth);
  Message m;
  m.procedure = Procedure::kExecuteOtf;
  m.step = 3;
  m.Add(Tag::kSessionId, it->second.sid)
      .Add(Tag::kEcho, Bytes(echo.begin(), echo.end()));
  SignMac(it->second.kses, m);
  Log(absl::StrCat("adversary answer ", Label(m), " conn=", conn));
  Enqueue(it->second.user, it->second.car, conn, *wire::Encode(m), true);
}

void Simulator::RunStep(const Step& st) {
  StepRecord rec;
  rec.line = st.line;
  rec.kind = st.kind;
  std::map<std::string, protocol::OpCounters> before;
  for (const auto& [name, a] : actors_) before[name] = a->counters();
  const auto started = std::chrono::steady_clock::now();
  std::string what = absl::StrJoin(st.actors, " ");
  if (!st.role.empty()) absl::StrAppend(&what, " role=", st.role);
  if (st.kind == StepKind::kExecute || st.kind == StepKind::kOtf) {
    absl::StrAppend(&what, " ", protocol::RenderCommand(st.command));
  }
  if (st.kind == StepKind::kDelegate) {
    absl::StrAppend(&what, " ", protocol::DelegationKindName(st.delegation));
  }
  if (st.kind == StepKind::kAdvance || st.kind == StepKind::kClock) {
    absl::StrAppend(&what, " ", st.seconds);
  }
  Log(absl::StrCat("step ", st.line, " ", StepKindName(st.kind), " ", what));

  auto actor = [&](size_t i) { return actors_.at(st.actors[i]).get(); };
  auto vin = [&](const std::string& car) {
    return scenario_.Find(car)->vin;
  };
  auto refuse = [&](const absl::Status& s) {
    rec.started = false;
    rec.note = std::string(s.message());
    Log(absl::StrCat("refused ", rec.note));
  };

  switch (st.kind) {
    case StepKind::kSetup: {
      auto* man = static_cast<protocol::Manufacturer*>(actor(0));
      const std::string& c = st.actors[1];
      built_by_[c] = man->name();
      Start(man->BeginSetup(
          c, NextConn(),
          {vin(c), car_keys_.at(c), policy::DefaultPolicyDocument()},
          Now(man->name())));
      break;
    }
    case StepKind::kSetRoot: {
      auto* sel = static_cast<protocol::Seller*>(actor(0));
      auto* own = static_cast<protocol::Owner*>(actor(1));
      const std::string& c = st.actors[2];
      std::string man = built_by_.contains(c) ? built_by_[c] : "";
      for (const ActorDecl& d : scenario_.actors) {
        if (man.empty() && d.kind == ActorKind::kManufacturer) man = d.name;
      }
      honest_owner_[c] = own->name();
      uint64_t conn = NextConn();
      Start(sel->BeginSetRoot(man, c, vin(c), conn, Now(sel->name())));
      Start(own->BeginSetRoot(sel->name(), conn,
                              absl::StrCat("owner-data:", own->name()),
                              Now(own->name())));
      break;
    }
    case StepKind::kUpload: {
      auto* own = static_cast<protocol::Owner*>(actor(0));
      const std::string& c = st.actors[1];
      absl::StatusOr<Envelope> e = own->BeginUpload(
          c, vin(c), st.role, NextConn(), Now(own->name()));
      if (e.ok()) {
        Start(*e);
      } else {
        refuse(e.status());
      }
      break;
    }
    case StepKind::kDelegate: {
      auto* own = static_cast<protocol::Owner*>(actor(0));
      auto* u = static_cast<protocol::User*>(actor(1));
      u->TrustOwnerGroup(own->owner_gpk());
      uint64_t now = Now(u->name());
      uint64_t stop = st.duration == 0 ? protocol::kForever : now + st.duration;
      own->Approve({u->name(), st.role, st.delegation, st.attributes, now,
                    stop});
      absl::StatusOr<Envelope> e =
          u->BeginDelegate(own->name(), st.role, st.delegation, st.attributes,
                           now, stop, NextConn(), now);
      if (e.ok()) {
        Start(*e);
      } else {
        refuse(e.status());
      }
      break;
    }
    case StepKind::kExecute: {
      auto* u = static_cast<protocol::User*>(actor(0));
      const std::string& c = st.actors[1];
      requested_.push_back({c, st.role, st.command});
      session_role_[{u->name(), c}] = st.role;
      absl::StatusOr<Envelope> e = u->BeginExecute(
          c, vin(c), st.role, st.command, NextConn(), Now(u->name()));
      if (e.ok()) {
        Start(*e);
        AfterExecute(u->name(), c);
      } else {
        refuse(e.status());
      }
      break;
    }
    case StepKind::kOtf: {
      auto* u = static_cast<protocol::User*>(actor(0));
      const std::string& c = st.actors[1];
      auto role = session_role_.find({u->name(), c});
      if (role != session_role_.end()) {
        requested_.push_back({c, role->second, st.command});
      }
      absl::StatusOr<Envelope> e =
          u->BeginOtf(c, st.command, NextConn(), Now(u->name()));
      if (e.ok()) {
        Start(*e);
      } else {
        refuse(e.status());
      }
      break;
    }
    case StepKind::kAdvance:
      advanced_ += static_cast<uint64_t>(st.seconds);
      break;
    case StepKind::kRevoke: {
      const std::string& auth = st.actors[0];
      auto* c = static_cast<protocol::Car*>(actor(1));
      const std::string& target_user = st.actors[2];
      Bytes target;
      if (st.target == protocol::RevocationTarget::kPseudonym) {
        target = ToBytes(target_user);
      } else {
        for (const auto& [role, tok] : user(target_user)->tokens()) {
          if (tok.credential) {
            crypto::Digest d = protocol::TokenDigest(*tok.credential);
            target.assign(d.begin(), d.end());
            break;
          }
        }
        if (target.empty()) {
          refuse(absl::FailedPreconditionError(
              absl::StrCat(target_user, " holds no ephemeral token")));
          break;
        }
      }
      uint64_t now = Now(auth);
      protocol::RevocationRequest req;
      if (auto* o = dynamic_cast<protocol::Owner*>(actors_.at(auth).get())) {
        req = o->MakeRevocation(st.target, target, std::nullopt, now);
      } else {
        req = static_cast<protocol::User*>(actors_.at(auth).get())
                  ->MakeRevocation(st.target, target, std::nullopt, now);
      }
      rec.revocation = c->Revoke(req, Now(c->name()));
      Log(absl::StrCat("revoke ", auth, " ", c->name(), " ",
                       st.target == protocol::RevocationTarget::kPseudonym
                           ? "pseudonym "
                           : "token ",
                       target_user, " ",
                       rec.revocation.ok()
                           ? "accepted"
                           : absl::StrCat("rejected ",
                                          rec.revocation.message())));
      break;
    }
    case StepKind::kClock:
      offsets_[st.actors[0]] = st.seconds;
      break;
  }
  LogNewEvents();
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  for (const auto& [name, a] : actors_) {
    protocol::OpCounters d = a->counters() - before[name];
    rec.ops += d;
    rec.actor_ops[name] = d;
  }
  result_.steps.push_back(std::move(rec));
}

void Simulator::CheckSafety() {
  std::vector<ActionRecord> requested = requested_;
  std::sort(requested.begin(), requested.end());
  for (const auto& [name, a] : actors_) {
    const auto* c = dynamic_cast<const protocol::Car*>(a.get());
    if (!c) continue;
    for (const protocol::ExecutedAction& e : c->executed()) {
      policy::Decision d = c->policy().Check(
          e.role, e.command.object, e.command.action, e.attributes, e.time);
      if (!d.allowed) {
        result_.violations.push_back(
            absl::StrCat(name, " executed policy-denied ",
                         protocol::RenderCommand(e.command), " as ", e.role));
      }
      ActionRecord r{name, e.role, e.command};
      auto it = std::lower_bound(requested.begin(), requested.end(), r);
      if (it == requested.end() || !(*it == r)) {
        result_.violations.push_back(absl::StrCat(
            name, " executed unrequested ", protocol::RenderCommand(e.command),
            " as ", e.role));
      } else {
        requested.erase(it);
      }
    }
    auto honest = honest_owner_.find(name);
    if (c->owner() &&
        (honest == honest_owner_.end() || *c->owner() != honest->second)) {
      result_.violations.push_back(
          absl::StrCat(name, " has foreign owner ", *c->owner()));
      continue;
    }
    if (!c->owner()) continue;
    const protocol::Owner* own = owner(*c->owner());
    for (const auto& [role, key] : c->role_keys()) {
      const groupsig::GroupPublicKey* want =
          own ? own->GroupKey(role) : nullptr;
      if (!want || !(*want == key.gpk)) {
        result_.violations.push_back(
            absl::StrCat(name, " holds a foreign group key for ", role));
      }
    }
  }
}

const Result& Simulator::Run() {
  if (ran_) return result_;
  ran_ = true;
  result_.transcript.push_back(absl::StrCat("# seed ", scenario_.seed));
  result_.transcript.push_back(
      absl::StrCat("# strategy ", RenderStrategy(scenario_.strategy)));
  for (const Step& st : scenario_.steps) RunStep(st);
  result_.strategy_applied = strategy_hits_ > 0;
  CheckSafety();
  for (const std::string& v : result_.violations) Log("violation " + v);
  Log(absl::StrCat("verdict ", result_.attack_found() ? "attack" : "safe"));
  return result_;
}

std::vector<Scenario> SafetyBattery(
    const Scenario& base, const std::vector<wire::Procedure>& procedures) {
  std::vector<Scenario> out;
  auto add = [&](Strategy s) {
    Scenario v = base;
    v.strategy = std::move(s);
    v.expect = Expectation::kSafe;
    out.push_back(std::move(v));
  };
  for (Procedure p : procedures) {
    for (int step = 1; step <= wire::StepCount(p); ++step) {
      std::vector<Tag> tags;
      bool authed = false;
      for (const wire::Schema& sch : wire::SchemasFor(p, step)) {
        for (Tag t : sch.fields) {
          if (std::find(tags.begin(), tags.end(), t) == tags.end()) {
            tags.push_back(t);
          }
        }
        authed = authed || sch.auth != wire::AuthKind::kNone;
      }
      Strategy s;
      s.procedure = p;
      s.step = step;
      s.kind = StrategyKind::kMutate;
      for (Tag t : tags) {
        s.field = t;
        add(s);
      }
      s.field.reset();
      if (authed) add(s);
      for (StrategyKind k : {StrategyKind::kDrop, StrategyKind::kReplay,
                             StrategyKind::kSplice}) {
        s.kind = k;
        add(s);
      }
    }
  }
  return out;
}

}  // namespace carsec::sim
