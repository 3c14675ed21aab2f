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


#include "absl/strings/str_cat.h"
#include "carsec/protocol/actors.h"

namespace carsec::protocol {

using wire::Message;
using wire::Procedure;
using wire::Tag;

Actor::Actor(std::string name, const Deployment& deployment, uint64_t seed)
    : name_(std::move(name)), deployment_(deployment), rng_(seed) {}

void Actor::NoteMalformed(uint64_t conn, uint64_t now, std::string detail) {
  aborts_.push_back(Abort{Procedure::kSetup, 0, Reason::kMalformed,
                          std::move(detail), conn, now});
}

std::vector<Envelope> Actor::Fail(const Envelope& in, Reason reason,
                                  std::string detail, uint64_t now) {
  aborts_.push_back(Abort{in.msg.procedure, in.msg.step, reason,
                          std::move(detail), in.conn, now});
  return {};
}

Envelope Actor::Reply(const Envelope& in, Message msg) const {
  return Envelope{name_, in.from, in.conn, false, std::move(msg)};
}

Envelope Actor::Send(const std::string& to, uint64_t conn, Message msg) const {
  return Envelope{name_, to, conn, false, std::move(msg)};
}

void Actor::SignIbs(const ibs::UserKey& key, Message& msg) {
  ++counters_.ibs_sign;
  msg.auth_kind = wire::AuthKind::kIbs;
  ibs::Signature sig = ibs::Sign(key, wire::SignedPortion(msg), rng_);
  msg.auth = ibs::EncodeSignature(key.params, sig);
}

bool Actor::VerifyIbs(const std::string& identity, const Message& msg) {
  if (msg.auth_kind != wire::AuthKind::kIbs) return false;
  ++counters_.ibs_verify;
  return ibs::VerifyEncoded(deployment_.ibs, ToBytes(identity),
                            wire::SignedPortion(msg), msg.auth);
}

absl::Status Actor::SignGroup(const groupsig::GroupPublicKey& gpk,
                              const groupsig::GroupMemberKey& member,
                              Message& msg) {
  ++counters_.gs_sign;
  msg.auth_kind = wire::AuthKind::kGroup;
  absl::StatusOr<Bytes> sig =
      groupsig::Sign(gpk, member, wire::SignedPortion(msg), rng_);
  if (!sig.ok()) return sig.status();
  msg.auth = *std::move(sig);
  return absl::OkStatus();
}

bool Actor::VerifyGroup(const groupsig::GroupPublicKey& gpk, ByteSpan msg,
                        ByteSpan sig) {
  ++counters_.gs_verify;
  return groupsig::Verify(gpk, msg, sig);
}

void Actor::SignMac(const crypto::SymmetricKey& key, Message& msg) {
  ++counters_.mac;
  msg.auth_kind = wire::AuthKind::kMac;
  crypto::MacTag tag = crypto::MacSign(key, wire::SignedPortion(msg));
  msg.auth.assign(tag.begin(), tag.end());
}

bool Actor::VerifyMac(const crypto::SymmetricKey& key, const Message& msg) {
  if (msg.auth_kind != wire::AuthKind::kMac) return false;
  ++counters_.mac;
  return crypto::MacVerify(key, wire::SignedPortion(msg), msg.auth);
}

Bytes Actor::Seal(const crypto::SymmetricKey& key, ByteSpan plaintext) {
  ++counters_.sym;
  return crypto::SymEncrypt(key, plaintext, rng_);
}

absl::StatusOr<Bytes> Actor::Open(const crypto::SymmetricKey& key,
                                  ByteSpan sealed) {
  ++counters_.sym;
  return crypto::SymDecrypt(key, sealed);
}

Message Actor::Start(Procedure procedure, int step) {
  Message msg;
  msg.procedure = procedure;
  msg.step = static_cast<uint8_t>(step);
  return msg;
}

std::optional<std::string> Actor::FieldString(const Message& msg, Tag tag) {
  const Bytes* v = msg.Find(tag);
  if (v == nullptr) return std::nullopt;
  return ToString(*v);
}

std::optional<uint64_t> Actor::FieldTime(const Message& msg, Tag tag) {
  const Bytes* v = msg.Find(tag);
  if (v == nullptr) return std::nullopt;
  absl::StatusOr<uint64_t> t = DecodeTimestamp(*v);
  if (!t.ok()) return std::nullopt;
  return *t;
}

bool Actor::TimestampFresh(const Message& msg, uint64_t now) {
  std::optional<uint64_t> ts = FieldTime(msg, Tag::kTimestamp);
  return ts.has_value() && Fresh(*ts, now);
}

// Manufacturer.

Manufacturer::Manufacturer(std::string name, const Deployment& deployment,
                           uint64_t seed, ibs::UserKey key)
    : Actor(std::move(name), deployment, seed), key_(std::move(key)) {}

Envelope Manufacturer::BeginSetup(const std::string& car, uint64_t conn,
                                  const CarBundle& bundle, uint64_t now) {
  built_.insert(bundle.car_id);
  Message msg = Start(Procedure::kSetup, 1);
  msg.Add(Tag::kManufacturer, ToBytes(name_))
      .Add(Tag::kCarId, ToBytes(bundle.car_id))
      .Add(Tag::kIbsParams, ibs::EncodePublicParams(deployment_.ibs))
      .Add(Tag::kCarKey, ibs::EncodeUserKey(bundle.car_key))
      .Add(Tag::kPolicy, ToBytes(bundle.policy_document))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  return Send(car, conn, std::move(msg));
}

std::vector<Envelope> Manufacturer::Receive(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!wire::Encode(m).ok()) return Fail(in, Reason::kMalformed, "", now);
  if (m.procedure != Procedure::kSetRoot || m.step != 1) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  std::string seller = *FieldString(m, Tag::kSeller);
  if (*FieldString(m, Tag::kManufacturer) != name_) {
    return Fail(in, Reason::kWrongPeer, "request names another manufacturer",
                now);
  }
  std::string car_id = *FieldString(m, Tag::kCarId);
  if (!built_.contains(car_id)) {
    return Fail(in, Reason::kWrongCar, car_id, now);
  }
  if (!TimestampFresh(m, now)) {
    return Fail(in, Reason::kStaleTimestamp, "", now);
  }
  if (!VerifyIbs(seller, m)) {
    return Fail(in, Reason::kBadSignature, "seller request", now);
  }
  Message reply = Start(Procedure::kSetRoot, 2);
  reply.Add(Tag::kAction, ToBytes(kActInstallSeller))
      .Add(Tag::kSeller, ToBytes(seller))
      .Add(Tag::kCarId, ToBytes(car_id))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, reply);
  return {Reply(in, std::move(reply))};
}

// Seller.

Seller::Seller(std::string name, const Deployment& deployment, uint64_t seed,
               ibs::UserKey key)
    : Actor(std::move(name), deployment, seed), key_(std::move(key)) {}

Envelope Seller::BeginSetRoot(const std::string& manufacturer,
                              const std::string& car,
                              const std::string& car_id, uint64_t conn,
                              uint64_t now) {
  sales_[conn] = Sale{manufacturer, car, car_id, std::nullopt};
  Message msg = Start(Procedure::kSetRoot, 1);
  msg.Add(Tag::kSeller, ToBytes(name_))
      .Add(Tag::kManufacturer, ToBytes(manufacturer))
      .Add(Tag::kCarId, ToBytes(car_id))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, msg);
  return Send(manufacturer, conn, std::move(msg));
}

std::vector<Envelope> Seller::Receive(const Envelope& in, uint64_t now) {
  const Message& m = in.msg;
  if (!wire::Encode(m).ok()) return Fail(in, Reason::kMalformed, "", now);
  if (m.procedure != Procedure::kSetRoot || (m.step != 2 && m.step != 3)) {
    return Fail(in, Reason::kUnexpectedStep, "", now);
  }
  auto it = sales_.find(in.conn);
  if (it == sales_.end()) {
    return Fail(in, Reason::kUnexpectedStep, "no sale on connection", now);
  }
  Sale& sale = it->second;

  if (m.step == 2) {
    if (sale.installation) {
      return Fail(in, Reason::kUnexpectedStep, "duplicate installation", now);
    }
    if (*FieldString(m, Tag::kAction) != kActInstallSeller ||
        *FieldString(m, Tag::kSeller) != name_) {
      return Fail(in, Reason::kWrongPeer, "installation names another seller",
                  now);
    }
    if (*FieldString(m, Tag::kCarId) != sale.car_id) {
      return Fail(in, Reason::kWrongCar, "", now);
    }
    if (!TimestampFresh(m, now)) {
      return Fail(in, Reason::kStaleTimestamp, "", now);
    }
    if (!VerifyIbs(sale.manufacturer, m)) {
      return Fail(in, Reason::kBadSignature, "manufacturer installation", now);
    }
    sale.installation = m;
    return {};
  }

  // Owner data travels only over a trusted channel.
  if (!in.trusted) return Fail(in, Reason::kUntrustedChannel, "", now);
  if (!sale.installation) {
    return Fail(in, Reason::kUnexpectedStep, "no installation yet", now);
  }
  if (m.Find(Tag::kOwnerData)->empty()) {
    return Fail(in, Reason::kMalformed, "empty owner data", now);
  }
  Message out = Start(Procedure::kSetRoot, 4);
  out.Add(Tag::kPseudonym, *m.Find(Tag::kPseudonym))
      .Add(Tag::kTStart, *m.Find(Tag::kTStart))
      .Add(Tag::kTStop, *m.Find(Tag::kTStop))
      .Add(Tag::kSeller, ToBytes(name_))
      .Add(Tag::kEmbedded, *wire::Encode(*sale.installation))
      .Add(Tag::kTimestamp, EncodeTimestamp(now));
  SignIbs(key_, out);
  Envelope env = Send(sale.car, in.conn, std::move(out));
  sales_.erase(it);
  return {std::move(env)};
}

}  // namespace carsec::protocol
