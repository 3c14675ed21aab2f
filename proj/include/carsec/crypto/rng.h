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

#ifndef CARSEC_CRYPTO_RNG_H_
#define CARSEC_CRYPTO_RNG_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "carsec/crypto/bytes.h"

namespace carsec::crypto {

// Source of randomness injected into every operation that needs it. Nothing
// in the library draws from a global generator.
class Rng {
 public:
  virtual ~Rng() = default;

  virtual void Fill(std::span<uint8_t> out) = 0;

  Bytes Generate(size_t n);
  uint64_t NextU64();
  // Uniform in [0, bound). `bound` must be non-zero.
  uint64_t Uniform(uint64_t bound);
};

// Seeded generator: SHA-256 over (seed key || 64-bit block counter). Two
// instances built from the same seed produce the same stream.
class DeterministicRng final : public Rng {
 public:
  explicit DeterministicRng(uint64_t seed);
  explicit DeterministicRng(ByteSpan seed);

  void Fill(std::span<uint8_t> out) override;

  // Independent child stream, keyed by this stream's seed and `label`. Does
  // not advance the parent.
  DeterministicRng Fork(std::string_view label) const;

 private:
  void Refill();

  std::array<uint8_t, 32> key_;
  uint64_t counter_ = 0;
  std::array<uint8_t, 32> block_{};
  size_t used_ = 32;
};

// Operating-system randomness, for the CLI when no seed is given.
class SystemRng final : public Rng {
 public:
  void Fill(std::span<uint8_t> out) override;
};

}  // namespace carsec::crypto

#endif  // CARSEC_CRYPTO_RNG_H_
