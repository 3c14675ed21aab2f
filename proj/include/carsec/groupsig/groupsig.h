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

// Group signatures: any member signs on behalf of the group, verifiers see
// only the group public key, and the manager can trace a signature back to
// the member index. Static groups of n members fixed at generation time.
//
// Two backends over P-256 implement the same contract.
//
// kReference: every member shares one group signing key z. A signature is
// a Schnorr signature under z over (group id, msg, escrow), where the
// escrow is the member's index and manager-issued certificate encrypted to
// the manager's tracing key. Tracing decrypts the escrow and checks the
// certificate. Signatures are constant size.
//
// kRing: member i holds x_i and the public key lists every X_i = x_i G. A
// signature ElGamal-encrypts the signer's X_i to the tracing key and proves
// in zero knowledge that the ciphertext holds some X_j whose discrete log
// the signer knows (a Fiat-Shamir OR-proof over all members). Tracing
// decrypts and looks the key up. Signatures grow linearly with n.
//
// Keys are opaque byte strings tagged with their backend; mixing backends
// is an error.

#ifndef CARSEC_GROUPSIG_GROUPSIG_H_
#define CARSEC_GROUPSIG_GROUPSIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "carsec/crypto/bytes.h"
#include "carsec/crypto/rng.h"

namespace carsec::groupsig {

enum class Backend : uint8_t {
  kReference = 1,
  kRing = 2,
};

std::string BackendName(Backend backend);
absl::StatusOr<Backend> ParseBackend(const std::string& name);

struct GroupPublicKey {
  Backend backend;
  uint32_t size;
  Bytes material;

  friend bool operator==(const GroupPublicKey&,
                         const GroupPublicKey&) = default;
};

struct GroupManagerKey {
  Backend backend;
  Bytes material;
};

struct GroupMemberKey {
  Backend backend;
  // 1..n.
  uint32_t index;
  Bytes material;
};

struct Group {
  GroupPublicKey gpk;
  GroupManagerKey gmsk;
  std::vector<GroupMemberKey> members;
};

// n >= 1.
absl::StatusOr<Group> Generate(Backend backend, uint32_t n,
                               crypto::Rng& rng);

// Fails only on a backend mismatch or malformed key. A member key from a
// different group of the same backend signs, and the result does not
// verify.
absl::StatusOr<Bytes> Sign(const GroupPublicKey& gpk,
                           const GroupMemberKey& member, ByteSpan msg,
                           crypto::Rng& rng);

// Total on arbitrary input.
bool Verify(const GroupPublicKey& gpk, ByteSpan msg, ByteSpan sig);

// Index of the signer. Invalid signatures are an error.
absl::StatusOr<uint32_t> Trace(const GroupPublicKey& gpk,
                               const GroupManagerKey& gmsk, ByteSpan msg,
                               ByteSpan sig);

size_t SignatureSize(const GroupPublicKey& gpk);

// Key files (see wire/tlv.h). Decoding checks the backend tag.
Bytes EncodePublicKey(const GroupPublicKey& key);
absl::StatusOr<GroupPublicKey> DecodePublicKey(ByteSpan file,
                                               Backend expected);
Bytes EncodeManagerKey(const GroupManagerKey& key);
absl::StatusOr<GroupManagerKey> DecodeManagerKey(ByteSpan file,
                                                 Backend expected);
Bytes EncodeMemberKey(const GroupMemberKey& key);
absl::StatusOr<GroupMemberKey> DecodeMemberKey(ByteSpan file,
                                               Backend expected);
// Backend recorded in any group key file.
absl::StatusOr<Backend> PeekBackend(ByteSpan file);

}  // namespace carsec::groupsig

#endif  // CARSEC_GROUPSIG_GROUPSIG_H_
