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

#include "carsec/wire/chunk.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace carsec::wire {

absl::StatusOr<std::vector<Chunk>> Split(ByteSpan message, size_t mtu) {
  if (mtu < kMinMtu) {
    return absl::InvalidArgumentError(
        absl::StrCat("mtu ", mtu, " below minimum ", kMinMtu));
  }
  const size_t room = mtu - kChunkHeaderSize;
  const size_t total = message.empty() ? 1 : (message.size() + room - 1) / room;
  if (total > 0xffff) {
    return absl::InvalidArgumentError("message needs more than 65535 chunks");
  }
  std::vector<Chunk> chunks;
  for (size_t i = 0; i < total; ++i) {
    size_t begin = i * room;
    size_t end = std::min(message.size(), begin + room);
    chunks.push_back({static_cast<uint16_t>(i), static_cast<uint16_t>(total),
                      Bytes(message.begin() + begin, message.begin() + end)});
  }
  return chunks;
}

absl::StatusOr<Bytes> Reassemble(const std::vector<Chunk>& chunks) {
  if (chunks.empty()) return absl::InvalidArgumentError("no chunks");
  const size_t total = chunks.front().total;
  if (total == 0 || chunks.size() != total) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", total, " chunks, got ", chunks.size()));
  }
  std::vector<const Chunk*> slots(total, nullptr);
  for (const Chunk& c : chunks) {
    if (c.total != total) {
      return absl::InvalidArgumentError("inconsistent chunk totals");
    }
    if (c.seq >= total) {
      return absl::InvalidArgumentError(
          absl::StrCat("chunk seq ", c.seq, " out of range"));
    }
    if (slots[c.seq] != nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate chunk seq ", c.seq));
    }
    slots[c.seq] = &c;
  }
  Bytes out;
  for (const Chunk* c : slots) Append(out, c->payload);
  return out;
}

Bytes EncodeChunk(const Chunk& chunk) {
  Bytes out;
  AppendUint(out, chunk.seq, 2);
  AppendUint(out, chunk.total, 2);
  AppendUint(out, chunk.payload.size(), 2);
  Append(out, chunk.payload);
  return out;
}

absl::StatusOr<Chunk> DecodeChunk(ByteSpan frame) {
  if (frame.size() < kChunkHeaderSize) {
    return absl::InvalidArgumentError("truncated chunk header");
  }
  Chunk c{static_cast<uint16_t>(ReadUint(frame, 0, 2)),
          static_cast<uint16_t>(ReadUint(frame, 2, 2)), {}};
  size_t len = ReadUint(frame, 4, 2);
  if (frame.size() != kChunkHeaderSize + len) {
    return absl::InvalidArgumentError("chunk length mismatch");
  }
  c.payload.assign(frame.begin() + kChunkHeaderSize, frame.end());
  return c;
}

}  // namespace carsec::wire
