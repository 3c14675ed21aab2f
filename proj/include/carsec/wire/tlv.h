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

// Flat tag-length-value records: [tag u8][len u16 BE][value]. Used for key
// files and for structured values nested inside protocol message fields.

#ifndef CARSEC_WIRE_TLV_H_
#define CARSEC_WIRE_TLV_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"

namespace carsec::wire {

inline constexpr size_t kMaxTlvValue = 0xffff;

struct TlvRecord {
  uint8_t tag;
  Bytes value;

  friend bool operator==(const TlvRecord&, const TlvRecord&) = default;
};

class TlvWriter {
 public:
  TlvWriter& Add(uint8_t tag, ByteSpan value);
  TlvWriter& AddString(uint8_t tag, const std::string& value);
  TlvWriter& AddU64(uint8_t tag, uint64_t value);

  const Bytes& bytes() const { return out_; }
  Bytes Finish() && { return std::move(out_); }

 private:
  Bytes out_;
};

class TlvReader {
 public:
  // Rejects truncated records and trailing bytes.
  static absl::StatusOr<TlvReader> Parse(ByteSpan data);

  const std::vector<TlvRecord>& records() const { return records_; }
  bool Has(uint8_t tag) const;
  // Exactly one record with `tag` must be present.
  absl::StatusOr<Bytes> Get(uint8_t tag) const;
  absl::StatusOr<std::string> GetString(uint8_t tag) const;
  absl::StatusOr<uint64_t> GetU64(uint8_t tag) const;
  std::vector<Bytes> GetAll(uint8_t tag) const;

 private:
  std::vector<TlvRecord> records_;
};

enum class KeyFileKind : uint8_t {
  kIbsParams = 1,
  kIbsMaster = 2,
  kIbsUser = 3,
  kGroupPublic = 4,
  kGroupManager = 5,
  kGroupMember = 6,
};

// Key file layout: "CSK1" || kind u8 || TLV body.
Bytes WrapKeyFile(KeyFileKind kind, ByteSpan body);
absl::StatusOr<TlvReader> OpenKeyFile(ByteSpan file, KeyFileKind expected);

}  // namespace carsec::wire

#endif  // CARSEC_WIRE_TLV_H_
