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

#include "carsec/crypto/rng.h"

#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cstdlib>

namespace carsec::crypto {

Bytes Rng::Generate(size_t n) {
  Bytes out(n);
  Fill(out);
  return out;
}

uint64_t Rng::NextU64() {
  uint8_t buf[8];
  Fill(buf);
  return ReadUint(buf, 0, 8);
}

uint64_t Rng::Uniform(uint64_t bound) {
  // Rejection sampling removes the modulo bias.
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    uint64_t v = NextU64();
    if (v < limit) return v % bound;
  }
}

DeterministicRng::DeterministicRng(uint64_t seed) {
  Bytes s;
  AppendUint(s, seed, 8);
  SHA256(s.data(), s.size(), key_.data());
}

DeterministicRng::DeterministicRng(ByteSpan seed) {
  SHA256(seed.data(), seed.size(), key_.data());
}

void DeterministicRng::Refill() {
  Bytes input(key_.begin(), key_.end());
  AppendUint(input, counter_++, 8);
  SHA256(input.data(), input.size(), block_.data());
  used_ = 0;
}

void DeterministicRng::Fill(std::span<uint8_t> out) {
  size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) Refill();
    size_t take = std::min(out.size() - pos, block_.size() - used_);
    std::copy_n(block_.begin() + used_, take, out.begin() + pos);
    used_ += take;
    pos += take;
  }
}

DeterministicRng DeterministicRng::Fork(std::string_view label) const {
  Bytes seed(key_.begin(), key_.end());
  seed.push_back(0xff);
  Append(seed, ToBytes(label));
  return DeterministicRng(ByteSpan(seed));
}

void SystemRng::Fill(std::span<uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    std::abort();
  }
}

}  // namespace carsec::crypto
