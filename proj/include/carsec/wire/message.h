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

// Protocol messages. Every frame on the wire is one encoded Message:
//
//   [procedure u8][step u8][field-count u8]
//   field-count x [tag u8][len u16 BE][value]
//   [auth tag u8][len u16 BE][auth bytes]
//
// The auth tag is kAuthTagBase | AuthKind. Signatures and MACs cover the
// header and the fields, i.e. everything before the auth record
// (SignedPortion). Each (procedure, step) has a fixed schema listing the
// field tags in order and the auth kind; Decode accepts nothing else.

#ifndef CARSEC_WIRE_MESSAGE_H_
#define CARSEC_WIRE_MESSAGE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"

namespace carsec::wire {

enum class Procedure : uint8_t {
  kSetup = 1,
  kSetRoot = 2,
  kUploadGpk = 3,
  kDelegate = 4,
  kExecute = 5,
  kExecuteOtf = 6,
};

inline constexpr int kProcedureCount = 6;

std::string ProcedureName(Procedure p);
// Number of steps (messages) in a procedure.
int StepCount(Procedure p);

enum class AuthKind : uint8_t {
  kNone = 0,
  kIbs = 1,
  kGroup = 2,
  kMac = 3,
};

inline constexpr uint8_t kAuthTagBase = 0xf0;

// Field tags shared by all procedures.
enum class Tag : uint8_t {
  kManufacturer = 1,
  kSeller = 2,
  kCarId = 3,
  kIbsParams = 4,
  kCarKey = 5,
  kPolicy = 6,
  kTimestamp = 7,
  kAction = 8,
  kOwnerData = 9,
  kPseudonym = 10,
  kTStart = 11,
  kTStop = 12,
  kEmbedded = 13,
  kNonceA = 14,  // initiator nonce
  kNonceB = 15,  // responder nonce
  kRole = 16,
  kGpk = 17,
  kAttributes = 18,
  kDelegationKind = 19,
  kEphemeralKey = 20,
  kSealedToken = 21,
  kTruncSig = 22,
  kRequestDigest = 23,
  kResponseDigest = 24,
  kKemCiphertext = 25,
  kSessionId = 26,
  kSealedCommand = 27,
  kCredentialClaim = 28,
  kCredentialSig = 29,
  kEcho = 30,
};

std::string TagName(Tag tag);

struct Field {
  Tag tag;
  Bytes value;

  friend bool operator==(const Field&, const Field&) = default;
};

struct Message {
  Procedure procedure;
  uint8_t step = 1;
  std::vector<Field> fields;
  AuthKind auth_kind = AuthKind::kNone;
  Bytes auth;

  // First field with `tag`, or nullptr.
  const Bytes* Find(Tag tag) const;
  Message& Add(Tag tag, Bytes value);

  friend bool operator==(const Message&, const Message&) = default;
};

struct Schema {
  std::vector<Tag> fields;
  AuthKind auth;
};

// All legal layouts for (procedure, step); empty when the pair is unknown.
// Execute step 1 has two: group-signed and identity-signed.
const std::vector<Schema>& SchemasFor(Procedure p, int step);

// Fails when the message matches no schema or a value exceeds 65535 bytes.
absl::StatusOr<Bytes> Encode(const Message& msg);
// Strict: unknown procedure or step, schema mismatch, truncation and
// trailing bytes are all errors.
absl::StatusOr<Message> Decode(ByteSpan bytes);

// Header and fields, without the auth record. The input to signing.
Bytes SignedPortion(const Message& msg);

// Absolute byte offsets of each field value and of the auth value within
// Encode(msg). Used by the mutation battery.
struct ValueSpan {
  size_t offset;
  size_t length;
};
std::vector<ValueSpan> FieldSpans(const Message& msg);

}  // namespace carsec::wire

#endif  // CARSEC_WIRE_MESSAGE_H_
