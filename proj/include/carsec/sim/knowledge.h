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


// Dolev-Yao adversary knowledge. Monotone: items are only ever added.
//
// Closure rules, applied to a fixpoint after every addition:
//   chunk frame        -> its payload
//   encoded message    -> every field value and the auth value
//   strict TLV record  -> every record value
//   {x}_k, k known     -> x   (k is any known 32-byte item)

#ifndef CARSEC_SIM_KNOWLEDGE_H_
#define CARSEC_SIM_KNOWLEDGE_H_

#include <set>
#include <vector>

#include "carsec/crypto/bytes.h"

namespace carsec::sim {

class Knowledge {
 public:
  void Add(ByteSpan item);
  bool Knows(ByteSpan item) const;
  size_t size() const { return items_.size(); }
  const std::set<Bytes>& items() const { return items_; }
  // Known 32-byte items, each a candidate symmetric key.
  const std::set<Bytes>& keys() const { return keys_; }

 private:
  void Close();

  std::set<Bytes> items_;
  std::set<Bytes> keys_;
  std::vector<Bytes> pending_;
};

}  // namespace carsec::sim

#endif  // CARSEC_SIM_KNOWLEDGE_H_
