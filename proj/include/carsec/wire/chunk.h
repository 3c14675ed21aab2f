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

// Fragmentation for transports with a small frame size. A chunk frame is
// [seq u16][total u16][len u16][payload], seq counting from zero.

#ifndef CARSEC_WIRE_CHUNK_H_
#define CARSEC_WIRE_CHUNK_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"

namespace carsec::wire {

inline constexpr size_t kDefaultMtu = 254;
inline constexpr size_t kMinMtu = 16;
inline constexpr size_t kChunkHeaderSize = 6;

struct Chunk {
  uint16_t seq;
  uint16_t total;
  Bytes payload;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Splits into frames of at most `mtu` bytes. An empty message yields one
// empty chunk.
absl::StatusOr<std::vector<Chunk>> Split(ByteSpan message,
                                         size_t mtu = kDefaultMtu);
// Chunks may arrive in any order; every seq in [0, total) exactly once.
absl::StatusOr<Bytes> Reassemble(const std::vector<Chunk>& chunks);

Bytes EncodeChunk(const Chunk& chunk);
absl::StatusOr<Chunk> DecodeChunk(ByteSpan frame);

}  // namespace carsec::wire

#endif  // CARSEC_WIRE_CHUNK_H_
