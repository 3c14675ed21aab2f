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


#include "carsec/ibs/ibs.h"

#include <gtest/gtest.h>

#include <cstdint>
#include <numeric>
#include <set>

#include "carsec/crypto/big_num.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"

namespace carsec::ibs {
namespace {

using crypto::DeterministicRng;

constexpr int kTrials = 1000;

// Oracle arithmetic on machine words, by repeated multiplication only.
uint64_t OraclePow(uint64_t base, uint64_t exp, uint64_t n) {
  uint64_t acc = 1 % n;
  for (uint64_t i = 0; i < exp; ++i) acc = acc * (base % n) % n;
  return acc;
}

// Smallest d in [1, phi) with e*d = 1 mod phi, by exhaustive search.
uint64_t OracleInverse(uint64_t e, uint64_t phi) {
  for (uint64_t d = 1; d < phi; ++d) {
    if (e * d % phi == 1) return d;
  }
  return 0;
}

uint64_t U64(const BigNum& x) { return *x.ToU64(); }

struct TinyCase {
  uint64_t p, q, e;
};

constexpr TinyCase kTinyCases[] = {{5, 11, 3}, {7, 13, 5}, {11, 17, 3}};

TEST(TinyPrimeTest, SetupMatchesOracleInverse) {
  for (const TinyCase& tc : kTinyCases) {
    DeterministicRng rng(1);
    for (Scheme scheme : {Scheme::kShamir, Scheme::kGq}) {
      absl::StatusOr<MasterKey> msk = SetupFromPrimes(
          scheme, BigNum(tc.p), BigNum(tc.q), BigNum(tc.e), rng);
      ASSERT_TRUE(msk.ok()) << msk.status();
      const uint64_t phi = (tc.p - 1) * (tc.q - 1);
      EXPECT_EQ(U64(msk->params.n), tc.p * tc.q);
      EXPECT_EQ(U64(msk->params.exponent), tc.e);
      EXPECT_EQ(U64(msk->secret_exponent), OracleInverse(tc.e, phi));
    }
  }
}

TEST(TinyPrimeTest, TextbookCase) {
  DeterministicRng rng(1);
  absl::StatusOr<MasterKey> msk =
      SetupFromPrimes(Scheme::kShamir, BigNum(5), BigNum(11), BigNum(3), rng);
  ASSERT_TRUE(msk.ok());
  EXPECT_EQ(U64(msk->secret_exponent), 27u);

  absl::StatusOr<UserKey> key =
      KeyDerForElement(*msk, ToBytes("alice"), BigNum(4));
  ASSERT_TRUE(key.ok());
  EXPECT_EQ(U64(key->secret), 49u);
  EXPECT_EQ(OraclePow(49, 3, 55), 4u);

  const Bytes msg = ToBytes("open");
  Signature sig = SignWithCommitment(*key, msg, BigNum(2));
  EXPECT_EQ(U64(sig.second), 8u);
  const uint64_t h = U64(MessageExponent(key->params, BigNum(8), msg));
  EXPECT_EQ(U64(sig.first), 49 * OraclePow(2, h, 55) % 55);
  EXPECT_EQ(OraclePow(U64(sig.first), 3, 55), 4 * OraclePow(8, h, 55) % 55);
  EXPECT_TRUE(VerifyForElement(key->params, BigNum(4), msg, sig));
}

TEST(TinyPrimeTest, ExponentSharingFactorWithPhiIsResampled) {
  DeterministicRng rng(2);
  // phi(55) = 40, gcd(5, 40) = 5.
  absl::StatusOr<MasterKey> msk =
      SetupFromPrimes(Scheme::kShamir, BigNum(5), BigNum(11), BigNum(5), rng);
  ASSERT_TRUE(msk.ok());
  const uint64_t e = U64(msk->params.exponent);
  EXPECT_NE(e, 5u);
  EXPECT_EQ(std::gcd(e, uint64_t{40}), 1u);
  EXPECT_EQ(e * U64(msk->secret_exponent) % 40, 1u);
}

TEST(TinyPrimeTest, EveryOperationMatchesOracle) {
  for (const TinyCase& tc : kTinyCases) {
    const uint64_t n = tc.p * tc.q;
    const uint64_t phi = (tc.p - 1) * (tc.q - 1);
    const uint64_t d = OracleInverse(tc.e, phi);
    for (Scheme scheme : {Scheme::kShamir, Scheme::kGq}) {
      DeterministicRng rng(3);
      MasterKey msk = *SetupFromPrimes(scheme, BigNum(tc.p), BigNum(tc.q),
                                       BigNum(tc.e), rng);
      for (uint64_t j = 2; j < n; ++j) {
        if (std::gcd(j, n) != 1) continue;
        UserKey key = *KeyDerForElement(msk, ToBytes("id"), BigNum(j));
        uint64_t secret = U64(key.secret);
        if (scheme == Scheme::kShamir) {
          ASSERT_EQ(secret, OraclePow(j, d, n));
          ASSERT_EQ(OraclePow(secret, tc.e, n), j);
        } else {
          uint64_t j_inv = OracleInverse(j, n);
          ASSERT_EQ(secret, OraclePow(j_inv, d, n));
          ASSERT_EQ(OraclePow(secret, tc.e, n) * j % n, 1u);
        }
        for (uint64_t r : {uint64_t{2}, uint64_t{3}, n - 1}) {
          if (std::gcd(r, n) != 1) continue;
          const Bytes msg = {static_cast<uint8_t>(j), static_cast<uint8_t>(r)};
          Signature sig = SignWithCommitment(key, msg, BigNum(r));
          uint64_t t = OraclePow(r, tc.e, n);
          if (scheme == Scheme::kShamir) {
            uint64_t h = U64(MessageExponent(key.params, BigNum(t), msg));
            ASSERT_EQ(U64(sig.second), t);
            ASSERT_EQ(U64(sig.first), secret * OraclePow(r, h, n) % n);
            ASSERT_EQ(OraclePow(U64(sig.first), tc.e, n),
                      j * OraclePow(t, h, n) % n);
          } else {
            uint64_t h = U64(MessageExponent(key.params, BigNum(), msg));
            uint64_t big_d = OraclePow(j, h, n) * OraclePow(t, tc.e, n) % n;
            ASSERT_EQ(U64(sig.first), big_d);
            ASSERT_EQ(U64(sig.second), r * OraclePow(secret, big_d, n) % n);
            uint64_t t_prime = OraclePow(j, big_d, n) *
                               OraclePow(U64(sig.second), tc.e, n) % n;
            ASSERT_EQ(t_prime, t);
          }
          ASSERT_TRUE(VerifyForElement(key.params, BigNum(j), msg, sig));
        }
      }
    }
  }
}

TEST(TinyPrimeTest, IdentityMapFallsBackToUnits) {
  // With n = 55 about a quarter of hash values share a factor with n.
  const BigNum n(55);
  for (int i = 0; i < 200; ++i) {
    absl::StatusOr<BigNum> x = IdentityElement(n, ToBytes(std::to_string(i)));
    ASSERT_TRUE(x.ok());
    EXPECT_EQ(std::gcd(U64(*x), uint64_t{55}), 1u);
    EXPECT_FALSE(x->IsZero());
  }
}

class IbsTest : public ::testing::TestWithParam<Scheme> {
 protected:
  static void SetUpTestSuite() {
    DeterministicRng rng(0x1b5);
    for (Scheme scheme : {Scheme::kShamir, Scheme::kGq}) {
      SetupOptions options{scheme, kTestModulusBits, std::nullopt};
      masters_[static_cast<int>(scheme)] =
          new MasterKey(*ibs::Setup(options, rng));
    }
  }
  static void TearDownTestSuite() {
    for (MasterKey*& m : masters_) {
      delete m;
      m = nullptr;
    }
  }
  const MasterKey& msk() const {
    return *masters_[static_cast<int>(GetParam())];
  }

  static MasterKey* masters_[3];
};

MasterKey* IbsTest::masters_[3] = {nullptr, nullptr, nullptr};

TEST_P(IbsTest, ModulusHasRequestedSize) {
  EXPECT_EQ(msk().params.n.BitLength(), kTestModulusBits);
  EXPECT_EQ(msk().params.width(), 64u);
}

TEST_P(IbsTest, RoundTrips) {
  DeterministicRng rng(10);
  UserKey key = *KeyDer(msk(), ToBytes("PsU-alice"));
  for (int i = 0; i < kTrials; ++i) {
    Bytes msg = rng.Generate(rng.Uniform(64));
    Signature sig = Sign(key, msg, rng);
    ASSERT_TRUE(Verify(key.params, key.identity, msg, sig)) << i;
  }
}

TEST_P(IbsTest, KeyConsistency) {
  const PublicParams& pp = msk().params;
  for (int i = 0; i < 100; ++i) {
    UserKey key = *KeyDer(msk(), ToBytes("user-" + std::to_string(i)));
    BigNum e = key.secret.ModExp(pp.exponent, pp.n);
    if (pp.scheme == Scheme::kShamir) {
      ASSERT_EQ(e, key.identity_element);
    } else {
      ASSERT_TRUE(e.ModMul(key.identity_element, pp.n).IsOne());
    }
  }
}

TEST_P(IbsTest, DistinctIdentitiesHaveDistinctSecrets) {
  std::set<Bytes> secrets;
  for (int i = 0; i < 100; ++i) {
    UserKey key = *KeyDer(msk(), ToBytes("user-" + std::to_string(i)));
    EXPECT_TRUE(secrets.insert(key.secret.ToBytes()).second);
  }
}

TEST_P(IbsTest, FreshRandomnessPerSignature) {
  DeterministicRng rng(11);
  UserKey key = *KeyDer(msk(), ToBytes("car"));
  const Bytes msg = ToBytes("same message");
  EXPECT_NE(Sign(key, msg, rng), Sign(key, msg, rng));
}

TEST_P(IbsTest, SingleBitTamperingRejected) {
  DeterministicRng rng(12);
  UserKey key = *KeyDer(msk(), ToBytes("PsO"));
  const PublicParams& pp = key.params;
  for (int i = 0; i < kTrials; ++i) {
    Bytes msg = rng.Generate(1 + rng.Uniform(48));
    Bytes sig = EncodeSignature(pp, Sign(key, msg, rng));
    size_t bit = rng.Uniform((msg.size() + sig.size()) * 8);
    if (bit < msg.size() * 8) {
      msg[bit / 8] ^= 1 << (bit % 8);
    } else {
      bit -= msg.size() * 8;
      sig[bit / 8] ^= 1 << (bit % 8);
    }
    ASSERT_FALSE(VerifyEncoded(pp, key.identity, msg, sig)) << i;
  }
}

TEST_P(IbsTest, WrongIdentityRejected) {
  DeterministicRng rng(13);
  UserKey key = *KeyDer(msk(), ToBytes("PsU-1"));
  for (int i = 0; i < 100; ++i) {
    Bytes msg = rng.Generate(16);
    Signature sig = Sign(key, msg, rng);
    ASSERT_FALSE(Verify(key.params, ToBytes("PsU-" + std::to_string(i + 2)),
                        msg, sig));
  }
}

TEST_P(IbsTest, MalformedEncodingsRejected) {
  const PublicParams& pp = msk().params;
  const Bytes id = ToBytes("x");
  EXPECT_FALSE(VerifyEncoded(pp, id, {}, {}));
  EXPECT_FALSE(VerifyEncoded(pp, id, {}, Bytes(2 * pp.width() - 1, 1)));
  EXPECT_FALSE(VerifyEncoded(pp, id, {}, Bytes(2 * pp.width(), 0)));
  EXPECT_FALSE(VerifyEncoded(pp, id, {}, Bytes(2 * pp.width(), 0xff)));
}

TEST_P(IbsTest, KeyFilesRoundTrip) {
  UserKey key = *KeyDer(msk(), ToBytes("car-vin"));
  absl::StatusOr<PublicParams> pp =
      DecodePublicParams(EncodePublicParams(msk().params));
  ASSERT_TRUE(pp.ok());
  EXPECT_EQ(pp->n, msk().params.n);
  EXPECT_EQ(pp->scheme, GetParam());
  absl::StatusOr<MasterKey> m = DecodeMasterKey(EncodeMasterKey(msk()));
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->secret_exponent, msk().secret_exponent);
  absl::StatusOr<UserKey> u = DecodeUserKey(EncodeUserKey(key));
  ASSERT_TRUE(u.ok());
  EXPECT_EQ(u->secret, key.secret);
  EXPECT_EQ(u->identity, key.identity);
  // Kind mismatch is an error.
  EXPECT_FALSE(DecodeUserKey(EncodeMasterKey(msk())).ok());
}

INSTANTIATE_TEST_SUITE_P(Schemes, IbsTest,
                         ::testing::Values(Scheme::kShamir, Scheme::kGq),
                         [](const auto& info) {
                           return SchemeName(info.param);
                         });

class GqAlgebraTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    DeterministicRng rng(0x60);
    msk_ = new MasterKey(
        *ibs::Setup({Scheme::kGq, kTestModulusBits, std::nullopt}, rng));
  }
  static void TearDownTestSuite() { delete msk_; }
  static MasterKey* msk_;
};

MasterKey* GqAlgebraTest::msk_ = nullptr;

TEST_F(GqAlgebraTest, RecomputedCommitmentEqualsSigners) {
  DeterministicRng rng(20);
  const PublicParams& pp = msk_->params;
  UserKey key = *KeyDer(*msk_, ToBytes("driver"));
  for (int i = 0; i < 200; ++i) {
    BigNum r = crypto::RandomUnit(pp.n, rng);
    Bytes msg = rng.Generate(20);
    Signature sig = SignWithCommitment(key, msg, r);
    BigNum t = r.ModExp(pp.exponent, pp.n);
    ASSERT_EQ(gq::RecomputeCommitment(pp, key.identity_element, sig), t);
  }
}

TEST_F(GqAlgebraTest, TextbookClosingCheckIsVacuous) {
  DeterministicRng rng(21);
  const PublicParams& pp = msk_->params;
  UserKey key = *KeyDer(*msk_, ToBytes("driver"));
  for (int i = 0; i < kTrials; ++i) {
    // Arbitrary (d, t), not a signature.
    Signature junk{crypto::RandomUnit(pp.n, rng),
                   crypto::RandomUnit(pp.n, rng)};
    BigNum c = MessageExponent(pp, BigNum(), rng.Generate(8));
    BigNum t_prime = gq::RecomputeCommitment(pp, key.identity_element, junk);
    BigNum d_prime = key.identity_element.ModExp(c, pp.n).ModMul(
        t_prime.ModExp(pp.exponent, pp.n), pp.n);
    ASSERT_EQ(d_prime, gq::ClosingValue(pp, key.identity_element, c, junk));
    ASSERT_FALSE(VerifyForElement(pp, key.identity_element, ToBytes("m"),
                                  junk));
  }
}

TEST(TruncateTest, LastEightBytes) {
  Bytes enc(256);
  for (size_t i = 0; i < enc.size(); ++i) enc[i] = static_cast<uint8_t>(i);
  TruncatedSignature tag = Truncate64(enc);
  for (size_t i = 0; i < 8; ++i) EXPECT_EQ(tag[i], 248 + i);
  EXPECT_EQ(Truncate64(enc), tag);
  TruncatedSignature short_tag = Truncate64(Bytes{7, 9});
  EXPECT_EQ(short_tag[6], 7);
  EXPECT_EQ(short_tag[7], 9);
  EXPECT_EQ(short_tag[0], 0);
}

TEST(TruncateTest, RandomSignaturesHaveDistinctTags) {
  DeterministicRng rng(30);
  MasterKey msk =
      *ibs::Setup({Scheme::kShamir, kTestModulusBits, std::nullopt}, rng);
  UserKey key = *KeyDer(msk, ToBytes("car"));
  std::set<TruncatedSignature> tags;
  for (int i = 0; i < kTrials; ++i) {
    Bytes enc = EncodeSignature(msk.params, Sign(key, ToBytes("m"), rng));
    ASSERT_TRUE(tags.insert(Truncate64(enc)).second);
  }
}

TEST(FullSizeTest, SignVerifyAt2048Bits) {
  for (Scheme scheme : {Scheme::kShamir, Scheme::kGq}) {
    DeterministicRng rng(static_cast<uint64_t>(scheme) + 2048);
    absl::StatusOr<MasterKey> msk =
        ibs::Setup({scheme, kDefaultModulusBits, std::nullopt}, rng);
    ASSERT_TRUE(msk.ok()) << msk.status();
    EXPECT_EQ(msk->params.n.BitLength(), kDefaultModulusBits);
    UserKey key = *KeyDer(*msk, ToBytes("1HGCM82633A004352"));
    Bytes enc = EncodeSignature(msk->params,
                                Sign(key, ToBytes("start engine"), rng));
    EXPECT_EQ(enc.size(), 512u);
    EXPECT_TRUE(VerifyEncoded(msk->params, key.identity,
                              ToBytes("start engine"), enc));
    EXPECT_FALSE(VerifyEncoded(msk->params, key.identity,
                               ToBytes("start engin3"), enc));
  }
}

TEST(SetupTest, RejectsBadModulusSizes) {
  DeterministicRng rng(1);
  EXPECT_FALSE(ibs::Setup({Scheme::kShamir, 256, std::nullopt}, rng).ok());
  EXPECT_FALSE(ibs::Setup({Scheme::kShamir, 513, std::nullopt}, rng).ok());
}

TEST(SchemeTest, Names) {
  EXPECT_EQ(*ParseScheme("shamir"), Scheme::kShamir);
  EXPECT_EQ(*ParseScheme("gq"), Scheme::kGq);
  EXPECT_FALSE(ParseScheme("rsa").ok());
}

}  // namespace
}  // namespace carsec::ibs
