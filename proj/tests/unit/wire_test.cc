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


#include <gtest/gtest.h>

#include <set>

#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"
#include "carsec/wire/chunk.h"
#include "carsec/wire/message.h"
#include "carsec/wire/tlv.h"

namespace carsec::wire {
namespace {

using crypto::DeterministicRng;

constexpr int kTrials = 1000;

Message RandomLegalMessage(DeterministicRng& rng) {
  for (;;) {
    auto proc = static_cast<Procedure>(1 + rng.Uniform(kProcedureCount));
    int step = 1 + static_cast<int>(rng.Uniform(StepCount(proc)));
    const std::vector<Schema>& schemas = SchemasFor(proc, step);
    const Schema& schema = schemas[rng.Uniform(schemas.size())];
    Message m{proc, static_cast<uint8_t>(step), {}, schema.auth, {}};
    for (Tag tag : schema.fields) m.Add(tag, rng.Generate(rng.Uniform(300)));
    if (schema.auth != AuthKind::kNone)
      m.auth = rng.Generate(1 + rng.Uniform(200));
    return m;
  }
}

TEST(MessageTest, RoundTripRandomLegalMessages) {
  DeterministicRng rng(1);
  for (int i = 0; i < kTrials; ++i) {
    Message m = RandomLegalMessage(rng);
    absl::StatusOr<Bytes> enc = Encode(m);
    ASSERT_TRUE(enc.ok()) << enc.status();
    absl::StatusOr<Message> dec = Decode(*enc);
    ASSERT_TRUE(dec.ok()) << dec.status();
    ASSERT_EQ(*dec, m);
    ASSERT_EQ(*Encode(m), *enc);
  }
}

TEST(MessageTest, DistinctMessagesHaveDistinctEncodings) {
  DeterministicRng rng(2);
  std::set<Bytes> seen;
  for (int i = 0; i < kTrials; ++i) {
    Message m = RandomLegalMessage(rng);
    Bytes base = *Encode(m);
    seen.insert(base);
    // Structured mutation: move one byte between adjacent fields.
    for (size_t f = 0; f + 1 < m.fields.size(); ++f) {
      if (m.fields[f].value.empty()) continue;
      Message moved = m;
      uint8_t b = moved.fields[f].value.back();
      moved.fields[f].value.pop_back();
      moved.fields[f + 1].value.insert(moved.fields[f + 1].value.begin(), b);
      ASSERT_NE(*Encode(moved), base);
      break;
    }
  }
  EXPECT_GT(seen.size(), kTrials - 5u);
}

TEST(MessageTest, EmptyInputRejected) { EXPECT_FALSE(Decode(Bytes{}).ok()); }

TEST(MessageTest, TruncationAndTrailingBytesRejected) {
  DeterministicRng rng(3);
  for (int i = 0; i < 200; ++i) {
    Bytes enc = *Encode(RandomLegalMessage(rng));
    Bytes cut(enc.begin(), enc.end() - 1 - rng.Uniform(enc.size() - 1));
    ASSERT_FALSE(Decode(cut).ok());
    Bytes longer = enc;
    longer.push_back(0);
    ASSERT_FALSE(Decode(longer).ok());
  }
}

TEST(MessageTest, UnknownProcedureOrStepRejected) {
  Message m{Procedure::kExecuteOtf, 3, {}, AuthKind::kMac, {1}};
  m.Add(Tag::kSessionId, Bytes(8, 1)).Add(Tag::kEcho, Bytes(32, 2));
  Bytes enc = *Encode(m);
  Bytes bad = enc;
  bad[0] = 7;
  EXPECT_FALSE(Decode(bad).ok());
  bad = enc;
  bad[0] = 0;
  EXPECT_FALSE(Decode(bad).ok());
  bad = enc;
  bad[1] = 4;
  EXPECT_FALSE(Decode(bad).ok());
  m.step = 4;
  EXPECT_FALSE(Encode(m).ok());
}

TEST(MessageTest, SchemaEnforced) {
  Message m{Procedure::kExecuteOtf, 1, {}, AuthKind::kMac, {1}};
  m.Add(Tag::kSealedCommand, {}).Add(Tag::kSessionId, {});
  EXPECT_FALSE(Encode(m).ok());
  std::swap(m.fields[0], m.fields[1]);
  EXPECT_TRUE(Encode(m).ok());
  m.auth_kind = AuthKind::kIbs;
  EXPECT_FALSE(Encode(m).ok());
}

TEST(MessageTest, ExecuteStepOneHasTwoLayouts) {
  EXPECT_EQ(SchemasFor(Procedure::kExecute, 1).size(), 2u);
}

TEST(MessageTest, StepCountsMatchProcedureShapes) {
  EXPECT_EQ(StepCount(Procedure::kSetup), 1);
  EXPECT_EQ(StepCount(Procedure::kSetRoot), 4);
  EXPECT_EQ(StepCount(Procedure::kUploadGpk), 4);
  EXPECT_EQ(StepCount(Procedure::kDelegate), 4);
  EXPECT_EQ(StepCount(Procedure::kExecute), 3);
  EXPECT_EQ(StepCount(Procedure::kExecuteOtf), 3);
}

TEST(MessageTest, SignedPortionIsPrefixWithoutAuth) {
  DeterministicRng rng(4);
  for (int i = 0; i < 100; ++i) {
    Message m = RandomLegalMessage(rng);
    Bytes enc = *Encode(m);
    Bytes portion = SignedPortion(m);
    ASSERT_EQ(enc.size(), portion.size() + 3 + m.auth.size());
    ASSERT_TRUE(std::equal(portion.begin(), portion.end(), enc.begin()));
    Message other = m;
    other.auth = rng.Generate(5);
    ASSERT_EQ(SignedPortion(other), portion);
  }
}

TEST(MessageTest, FieldSpansLocateValues) {
  DeterministicRng rng(5);
  Message m = RandomLegalMessage(rng);
  Bytes enc = *Encode(m);
  std::vector<ValueSpan> spans = FieldSpans(m);
  ASSERT_EQ(spans.size(), m.fields.size() + 1);
  for (size_t i = 0; i < m.fields.size(); ++i) {
    EXPECT_EQ(Bytes(enc.begin() + spans[i].offset,
                    enc.begin() + spans[i].offset + spans[i].length),
              m.fields[i].value);
  }
  EXPECT_EQ(spans.back().offset + spans.back().length, enc.size());
}

TEST(ChunkTest, SixHundredBytesAtDefaultMtuIsThreeChunks) {
  DeterministicRng rng(6);
  Bytes msg = rng.Generate(600);
  std::vector<Chunk> chunks = *Split(msg);
  ASSERT_EQ(chunks.size(), 3u);
  for (const Chunk& c : chunks) {
    EXPECT_LE(EncodeChunk(c).size(), kDefaultMtu);
    EXPECT_LE(c.payload.size(), kDefaultMtu - kChunkHeaderSize);
  }
  EXPECT_EQ(*Reassemble(chunks), msg);
}

TEST(ChunkTest, ShortMessageIsOneChunk) {
  EXPECT_EQ(Split(Bytes(100, 1))->size(), 1u);
  EXPECT_EQ(Split(Bytes(248, 1))->size(), 1u);
  EXPECT_EQ(Split(Bytes(249, 1))->size(), 2u);
  std::vector<Chunk> empty = *Split(Bytes{});
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(*Reassemble(empty), Bytes{});
}

TEST(ChunkTest, RoundTripAnyOrderAnyMtu) {
  DeterministicRng rng(7);
  for (int i = 0; i < kTrials; ++i) {
    size_t mtu = kMinMtu + rng.Uniform(300);
    Bytes msg = rng.Generate(rng.Uniform(2000));
    std::vector<Chunk> chunks = *Split(msg, mtu);
    for (size_t j = chunks.size(); j > 1; --j) {
      std::swap(chunks[j - 1], chunks[rng.Uniform(j)]);
    }
    std::vector<Chunk> decoded;
    for (const Chunk& c : chunks)
      decoded.push_back(*DecodeChunk(EncodeChunk(c)));
    ASSERT_EQ(*Reassemble(decoded), msg);
  }
}

TEST(ChunkTest, MissingDuplicateOrOutOfRangeRejected) {
  std::vector<Chunk> chunks = *Split(Bytes(600, 9));
  std::vector<Chunk> missing = {chunks[0], chunks[2]};
  EXPECT_FALSE(Reassemble(missing).ok());
  std::vector<Chunk> dup = {chunks[0], chunks[0], chunks[2]};
  EXPECT_FALSE(Reassemble(dup).ok());
  std::vector<Chunk> range = chunks;
  range[1].seq = 3;
  EXPECT_FALSE(Reassemble(range).ok());
  EXPECT_FALSE(Reassemble({}).ok());
}

TEST(ChunkTest, MtuBelowMinimumRejected) {
  EXPECT_FALSE(Split(Bytes(10), 15).ok());
  EXPECT_TRUE(Split(Bytes(10), 16).ok());
}

TEST(ChunkTest, MalformedFramesRejected) {
  EXPECT_FALSE(DecodeChunk(Bytes{0, 0, 0, 1}).ok());
  EXPECT_FALSE(DecodeChunk(Bytes{0, 0, 0, 1, 0, 2, 7}).ok());
}

TEST(TlvTest, RoundTripAndStrictness) {
  TlvWriter w;
  w.AddString(1, "role").AddU64(2, 42).Add(3, Bytes{});
  absl::StatusOr<TlvReader> r = TlvReader::Parse(w.bytes());
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(*r->GetString(1), "role");
  EXPECT_EQ(*r->GetU64(2), 42u);
  EXPECT_TRUE(r->Get(3)->empty());
  EXPECT_FALSE(r->Get(4).ok());
  Bytes cut = w.bytes();
  cut.pop_back();
  cut.pop_back();
  EXPECT_FALSE(TlvReader::Parse(cut).ok());
  w.Add(1, Bytes{1});
  EXPECT_FALSE(TlvReader::Parse(w.bytes())->Get(1).ok());
}

TEST(TlvTest, KeyFileKindChecked) {
  Bytes file = WrapKeyFile(KeyFileKind::kGroupPublic, Bytes{});
  EXPECT_TRUE(OpenKeyFile(file, KeyFileKind::kGroupPublic).ok());
  EXPECT_FALSE(OpenKeyFile(file, KeyFileKind::kGroupMember).ok());
  EXPECT_FALSE(OpenKeyFile(Bytes{1, 2}, KeyFileKind::kGroupMember).ok());
}

}  // namespace
}  // namespace carsec::wire
