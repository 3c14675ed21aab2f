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

#include "carsec/wire/message.h"

#include <array>
#include <map>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace carsec::wire {
namespace {

using T = Tag;
constexpr size_t kHeaderSize = 3;

using SchemaTable = std::map<std::pair<int, int>, std::vector<Schema>>;

SchemaTable BuildSchemas() {
  SchemaTable s;
  auto add = [&s](Procedure p, int step, std::vector<Tag> fields,
                  AuthKind auth) {
    s[{static_cast<int>(p), step}].push_back({std::move(fields), auth});
  };
  add(Procedure::kSetup, 1,
      {T::kManufacturer, T::kCarId, T::kIbsParams, T::kCarKey, T::kPolicy,
       T::kTimestamp},
      AuthKind::kNone);

  add(Procedure::kSetRoot, 1,
      {T::kSeller, T::kManufacturer, T::kCarId, T::kTimestamp},
      AuthKind::kIbs);
  add(Procedure::kSetRoot, 2,
      {T::kAction, T::kSeller, T::kCarId, T::kTimestamp}, AuthKind::kIbs);
  add(Procedure::kSetRoot, 3,
      {T::kOwnerData, T::kPseudonym, T::kTStart, T::kTStop},
      AuthKind::kNone);
  add(Procedure::kSetRoot, 4,
      {T::kPseudonym, T::kTStart, T::kTStop, T::kSeller, T::kEmbedded,
       T::kTimestamp},
      AuthKind::kIbs);

  add(Procedure::kUploadGpk, 1,
      {T::kNonceA, T::kPseudonym, T::kCarId, T::kTimestamp}, AuthKind::kIbs);
  add(Procedure::kUploadGpk, 2, {T::kNonceA, T::kNonceB, T::kTimestamp},
      AuthKind::kIbs);
  add(Procedure::kUploadGpk, 3,
      {T::kNonceA, T::kNonceB, T::kRole, T::kGpk, T::kTStart, T::kTStop,
       T::kTimestamp},
      AuthKind::kIbs);
  add(Procedure::kUploadGpk, 4, {T::kAction, T::kEmbedded, T::kTimestamp},
      AuthKind::kIbs);

  add(Procedure::kDelegate, 1,
      {T::kPseudonym, T::kRole, T::kAttributes, T::kTStart, T::kTStop,
       T::kDelegationKind, T::kEphemeralKey, T::kNonceA, T::kTimestamp},
      AuthKind::kIbs);
  add(Procedure::kDelegate, 2,
      {T::kNonceB, T::kNonceA, T::kSealedToken, T::kTruncSig, T::kTimestamp},
      AuthKind::kGroup);
  add(Procedure::kDelegate, 3,
      {T::kRequestDigest, T::kResponseDigest, T::kTimestamp},
      AuthKind::kIbs);
  add(Procedure::kDelegate, 4, {T::kKemCiphertext}, AuthKind::kNone);

  add(Procedure::kExecute, 1,
      {T::kNonceA, T::kRole, T::kAttributes, T::kTimestamp},
      AuthKind::kGroup);
  add(Procedure::kExecute, 1,
      {T::kNonceA, T::kRole, T::kAttributes, T::kTimestamp, T::kPseudonym,
       T::kCredentialClaim, T::kCredentialSig},
      AuthKind::kIbs);
  add(Procedure::kExecute, 2,
      {T::kEphemeralKey, T::kNonceB, T::kSessionId, T::kTruncSig,
       T::kTimestamp},
      AuthKind::kIbs);
  add(Procedure::kExecute, 3,
      {T::kSessionId, T::kKemCiphertext, T::kSealedCommand}, AuthKind::kMac);

  add(Procedure::kExecuteOtf, 1, {T::kSessionId, T::kSealedCommand},
      AuthKind::kMac);
  add(Procedure::kExecuteOtf, 2, {T::kNonceB, T::kTruncSig}, AuthKind::kMac);
  add(Procedure::kExecuteOtf, 3, {T::kSessionId, T::kEcho}, AuthKind::kMac);
  return s;
}

const SchemaTable& Schemas() {
  static const SchemaTable* table = new SchemaTable(BuildSchemas());
  return *table;
}

bool Matches(const Schema& schema, const Message& msg) {
  if (schema.auth != msg.auth_kind) return false;
  if (schema.fields.size() != msg.fields.size()) return false;
  for (size_t i = 0; i < msg.fields.size(); ++i) {
    if (schema.fields[i] != msg.fields[i].tag) return false;
  }
  return true;
}

absl::Status CheckSchema(const Message& msg) {
  const std::vector<Schema>& schemas = SchemasFor(msg.procedure, msg.step);
  if (schemas.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown procedure/step ",
                     static_cast<int>(msg.procedure), "/", msg.step));
  }
  for (const Schema& schema : schemas) {
    if (Matches(schema, msg)) return absl::OkStatus();
  }
  return absl::InvalidArgumentError(
      absl::StrCat("fields do not match the schema of ",
                   ProcedureName(msg.procedure), " step ", msg.step));
}

}  // namespace

std::string ProcedureName(Procedure p) {
  switch (p) {
    case Procedure::kSetup:
      return "setup";
    case Procedure::kSetRoot:
      return "set-root";
    case Procedure::kUploadGpk:
      return "upload-gpk";
    case Procedure::kDelegate:
      return "delegate";
    case Procedure::kExecute:
      return "execute";
    case Procedure::kExecuteOtf:
      return "execute-otf";
  }
  return "unknown";
}

int StepCount(Procedure p) {
  int n = 0;
  while (!SchemasFor(p, n + 1).empty()) ++n;
  return n;
}

std::string TagName(Tag tag) {
  static const std::array<const char*, 31> kNames = {
      "?",           "manufacturer", "seller",        "car-id",
      "ibs-params",  "car-key",      "policy",        "timestamp",
      "action",      "owner-data",   "pseudonym",     "t-start",
      "t-stop",      "embedded",     "nonce-a",       "nonce-b",
      "role",        "gpk",          "attributes",    "delegation-kind",
      "ephemeral-key", "sealed-token", "trunc-sig",   "request-digest",
      "response-digest", "kem-ciphertext", "session-id", "sealed-command",
      "credential-claim", "credential-sig", "echo"};
  size_t i = static_cast<size_t>(tag);
  return i < kNames.size() ? kNames[i] : absl::StrCat("tag", i);
}

const Bytes* Message::Find(Tag tag) const {
  for (const Field& f : fields) {
    if (f.tag == tag) return &f.value;
  }
  return nullptr;
}

Message& Message::Add(Tag tag, Bytes value) {
  fields.push_back({tag, std::move(value)});
  return *this;
}

const std::vector<Schema>& SchemasFor(Procedure p, int step) {
  static const std::vector<Schema> kNone;
  auto it = Schemas().find({static_cast<int>(p), step});
  return it == Schemas().end() ? kNone : it->second;
}

Bytes SignedPortion(const Message& msg) {
  Bytes out;
  out.push_back(static_cast<uint8_t>(msg.procedure));
  out.push_back(msg.step);
  out.push_back(static_cast<uint8_t>(msg.fields.size()));
  for (const Field& f : msg.fields) {
    out.push_back(static_cast<uint8_t>(f.tag));
    AppendUint(out, f.value.size(), 2);
    Append(out, f.value);
  }
  return out;
}

absl::StatusOr<Bytes> Encode(const Message& msg) {
  if (absl::Status s = CheckSchema(msg); !s.ok()) return s;
  for (const Field& f : msg.fields) {
    if (f.value.size() > 0xffff) {
      return absl::InvalidArgumentError(
          absl::StrCat("field ", TagName(f.tag), " exceeds 65535 bytes"));
    }
  }
  if (msg.auth.size() > 0xffff) {
    return absl::InvalidArgumentError("auth value exceeds 65535 bytes");
  }
  Bytes out = SignedPortion(msg);
  out.push_back(kAuthTagBase | static_cast<uint8_t>(msg.auth_kind));
  AppendUint(out, msg.auth.size(), 2);
  Append(out, msg.auth);
  return out;
}

absl::StatusOr<Message> Decode(ByteSpan bytes) {
  if (bytes.size() < kHeaderSize) {
    return absl::InvalidArgumentError("truncated message header");
  }
  if (bytes[0] < 1 || bytes[0] > kProcedureCount) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown procedure ", bytes[0]));
  }
  Message msg;
  msg.procedure = static_cast<Procedure>(bytes[0]);
  msg.step = bytes[1];
  if (SchemasFor(msg.procedure, msg.step).empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown step ", msg.step, " of ",
                     ProcedureName(msg.procedure)));
  }
  const size_t count = bytes[2];
  size_t pos = kHeaderSize;
  auto read_record = [&](uint8_t& tag, Bytes& value) -> bool {
    if (bytes.size() - pos < 3) return false;
    tag = bytes[pos];
    size_t len = ReadUint(bytes, pos + 1, 2);
    pos += 3;
    if (bytes.size() - pos < len) return false;
    value.assign(bytes.begin() + pos, bytes.begin() + pos + len);
    pos += len;
    return true;
  };
  for (size_t i = 0; i < count; ++i) {
    uint8_t tag;
    Bytes value;
    if (!read_record(tag, value)) {
      return absl::InvalidArgumentError("truncated field");
    }
    msg.fields.push_back({static_cast<Tag>(tag), std::move(value)});
  }
  uint8_t auth_tag;
  if (!read_record(auth_tag, msg.auth)) {
    return absl::InvalidArgumentError("truncated auth record");
  }
  if ((auth_tag & 0xf0) != kAuthTagBase || (auth_tag & 0x0f) > 3) {
    return absl::InvalidArgumentError("bad auth tag");
  }
  msg.auth_kind = static_cast<AuthKind>(auth_tag & 0x0f);
  if (msg.auth_kind == AuthKind::kNone && !msg.auth.empty()) {
    return absl::InvalidArgumentError("unauthenticated message carries auth");
  }
  if (pos != bytes.size()) {
    return absl::InvalidArgumentError("trailing bytes after message");
  }
  if (absl::Status s = CheckSchema(msg); !s.ok()) return s;
  return msg;
}

std::vector<ValueSpan> FieldSpans(const Message& msg) {
  std::vector<ValueSpan> spans;
  size_t pos = kHeaderSize;
  for (const Field& f : msg.fields) {
    spans.push_back({pos + 3, f.value.size()});
    pos += 3 + f.value.size();
  }
  spans.push_back({pos + 3, msg.auth.size()});
  return spans;
}

}  // namespace carsec::wire
