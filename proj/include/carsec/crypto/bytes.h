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

#ifndef CARSEC_CRYPTO_BYTES_H_
#define CARSEC_CRYPTO_BYTES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace carsec {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

inline Bytes ToBytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string ToString(ByteSpan b) {
  return std::string(b.begin(), b.end());
}

inline void Append(Bytes& out, ByteSpan more) {
  out.insert(out.end(), more.begin(), more.end());
}

// Appends `value` as `width` big-endian bytes.
void AppendUint(Bytes& out, uint64_t value, int width);

// Reads a big-endian unsigned integer of `width` bytes at `offset`.
uint64_t ReadUint(ByteSpan in, size_t offset, int width);

std::string ToHex(ByteSpan b);
absl::StatusOr<Bytes> FromHex(std::string_view hex);

// True iff `needle` occurs as a contiguous subsequence of `haystack`.
bool ContainsSubsequence(ByteSpan haystack, ByteSpan needle);

}  // namespace carsec

#endif  // CARSEC_CRYPTO_BYTES_H_
