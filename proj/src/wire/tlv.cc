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

#include "carsec/wire/tlv.h"

#include <cstdlib>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace carsec::wire {
namespace {

constexpr char kKeyFileMagic[] = "CSK1";

}  // namespace

TlvWriter& TlvWriter::Add(uint8_t tag, ByteSpan value) {
  if (value.size() > kMaxTlvValue) std::abort();
  out_.push_back(tag);
  AppendUint(out_, value.size(), 2);
  Append(out_, value);
  return *this;
}

TlvWriter& TlvWriter::AddString(uint8_t tag, const std::string& value) {
  return Add(tag, ToBytes(value));
}

TlvWriter& TlvWriter::AddU64(uint8_t tag, uint64_t value) {
  Bytes b;
  AppendUint(b, value, 8);
  return Add(tag, b);
}

absl::StatusOr<TlvReader> TlvReader::Parse(ByteSpan data) {
  TlvReader reader;
  size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 3) {
      return absl::InvalidArgumentError("truncated TLV header");
    }
    uint8_t tag = data[pos];
    size_t len = ReadUint(data, pos + 1, 2);
    pos += 3;
    if (data.size() - pos < len) {
      return absl::InvalidArgumentError("truncated TLV value");
    }
    reader.records_.push_back(
        {tag, Bytes(data.begin() + pos, data.begin() + pos + len)});
    pos += len;
  }
  return reader;
}

bool TlvReader::Has(uint8_t tag) const {
  for (const TlvRecord& r : records_) {
    if (r.tag == tag) return true;
  }
  return false;
}

absl::StatusOr<Bytes> TlvReader::Get(uint8_t tag) const {
  const TlvRecord* found = nullptr;
  for (const TlvRecord& r : records_) {
    if (r.tag != tag) continue;
    if (found != nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate TLV tag ", tag));
    }
    found = &r;
  }
  if (found == nullptr) {
    return absl::NotFoundError(absl::StrCat("missing TLV tag ", tag));
  }
  return found->value;
}

absl::StatusOr<std::string> TlvReader::GetString(uint8_t tag) const {
  absl::StatusOr<Bytes> b = Get(tag);
  if (!b.ok()) return b.status();
  return ToString(*b);
}

absl::StatusOr<uint64_t> TlvReader::GetU64(uint8_t tag) const {
  absl::StatusOr<Bytes> b = Get(tag);
  if (!b.ok()) return b.status();
  if (b->size() != 8) {
    return absl::InvalidArgumentError(
        absl::StrCat("TLV tag ", tag, " is not a 64-bit integer"));
  }
  return ReadUint(*b, 0, 8);
}

std::vector<Bytes> TlvReader::GetAll(uint8_t tag) const {
  std::vector<Bytes> out;
  for (const TlvRecord& r : records_) {
    if (r.tag == tag) out.push_back(r.value);
  }
  return out;
}

Bytes WrapKeyFile(KeyFileKind kind, ByteSpan body) {
  Bytes out = ToBytes(kKeyFileMagic);
  out.push_back(static_cast<uint8_t>(kind));
  Append(out, body);
  return out;
}

absl::StatusOr<TlvReader> OpenKeyFile(ByteSpan file, KeyFileKind expected) {
  if (file.size() < 5 || ToString(file.first(4)) != kKeyFileMagic) {
    return absl::InvalidArgumentError("not a key file");
  }
  if (file[4] != static_cast<uint8_t>(expected)) {
    return absl::InvalidArgumentError(
        absl::StrCat("key file holds kind ", file[4], ", expected ",
                     static_cast<int>(expected)));
  }
  return TlvReader::Parse(file.subspan(5));
}

}  // namespace carsec::wire
