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


#include "carsec/sim/knowledge.h"

#include "carsec/crypto/symmetric.h"
#include "carsec/wire/chunk.h"
#include "carsec/wire/message.h"
#include "carsec/wire/tlv.h"

namespace carsec::sim {

void Knowledge::Add(ByteSpan item) {
  pending_.emplace_back(item.begin(), item.end());
  Close();
}

bool Knowledge::Knows(ByteSpan item) const {
  return items_.contains(Bytes(item.begin(), item.end()));
}

void Knowledge::Close() {
  while (!pending_.empty()) {
    Bytes item = std::move(pending_.back());
    pending_.pop_back();
    if (!items_.insert(item).second) continue;

    if (absl::StatusOr<wire::Chunk> c = wire::DecodeChunk(item); c.ok()) {
      pending_.push_back(c->payload);
    }
    if (absl::StatusOr<wire::Message> m = wire::Decode(item); m.ok()) {
      for (const wire::Field& f : m->fields) pending_.push_back(f.value);
      pending_.push_back(m->auth);
    }
    if (absl::StatusOr<wire::TlvReader> r = wire::TlvReader::Parse(item);
        r.ok()) {
      for (const wire::TlvRecord& rec : r->records()) {
        pending_.push_back(rec.value);
      }
    }

    if (item.size() == crypto::kKeySize && keys_.insert(item).second) {
      // A new key reopens every sealed item seen so far.
      absl::StatusOr<crypto::SymmetricKey> k =
          crypto::SymmetricKey::FromBytes(item);
      for (const Bytes& sealed : items_) {
        if (sealed.size() < crypto::kAeadOverhead) continue;
        if (absl::StatusOr<Bytes> p = crypto::SymDecrypt(*k, sealed); p.ok()) {
          pending_.push_back(*std::move(p));
        }
      }
    }
    if (item.size() >= crypto::kAeadOverhead) {
      for (const Bytes& key : keys_) {
        absl::StatusOr<crypto::SymmetricKey> k =
            crypto::SymmetricKey::FromBytes(key);
        if (absl::StatusOr<Bytes> p = crypto::SymDecrypt(*k, item); p.ok()) {
          pending_.push_back(*std::move(p));
        }
      }
    }
  }
}

}  // namespace carsec::sim
