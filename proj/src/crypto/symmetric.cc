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

#include "carsec/crypto/symmetric.h"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <memory>

#include "absl/status/status.h"

namespace carsec::crypto {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

}  // namespace

Digest Hash(ByteSpan data) {
  Digest out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest Hash(std::initializer_list<ByteSpan> parts) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  for (ByteSpan p : parts) EVP_DigestUpdate(ctx.get(), p.data(), p.size());
  Digest out;
  EVP_DigestFinal_ex(ctx.get(), out.data(), nullptr);
  return out;
}

SymmetricKey SymmetricKey::Random(Rng& rng) {
  SymmetricKey k;
  rng.Fill(k.key_);
  return k;
}

absl::StatusOr<SymmetricKey> SymmetricKey::FromBytes(ByteSpan bytes) {
  if (bytes.size() != kKeySize) {
    return absl::InvalidArgumentError("symmetric key must be 32 bytes");
  }
  SymmetricKey k;
  std::copy(bytes.begin(), bytes.end(), k.key_.begin());
  return k;
}

SymmetricKey SymmetricKey::Derive(std::string_view label, ByteSpan material) {
  SymmetricKey k;
  k.key_ = Hash({ToBytes(label), material});
  return k;
}

MacTag MacSign(const SymmetricKey& key, ByteSpan msg) {
  MacTag tag;
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.bytes().data(), static_cast<int>(key.bytes().size()),
       msg.data(), msg.size(), tag.data(), &len);
  return tag;
}

bool MacVerify(const SymmetricKey& key, ByteSpan msg, ByteSpan tag) {
  MacTag expected = MacSign(key, msg);
  return ConstantTimeEquals(expected, tag);
}

bool ConstantTimeEquals(ByteSpan a, ByteSpan b) {
  if (a.size() != b.size()) return false;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Bytes SymEncrypt(const SymmetricKey& key, ByteSpan plaintext, Rng& rng) {
  Bytes out(kAeadNonceSize + plaintext.size() + kAeadTagSize);
  rng.Fill(std::span<uint8_t>(out.data(), kAeadNonceSize));

  CipherCtx ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes().data(),
                     out.data());
  EVP_EncryptUpdate(ctx.get(), out.data() + kAeadNonceSize, &len,
                    plaintext.data(), static_cast<int>(plaintext.size()));
  EVP_EncryptFinal_ex(ctx.get(), out.data() + kAeadNonceSize + len, &len);
  EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                      out.data() + kAeadNonceSize + plaintext.size());
  return out;
}

absl::StatusOr<Bytes> SymDecrypt(const SymmetricKey& key, ByteSpan sealed) {
  if (sealed.size() < kAeadOverhead) {
    return absl::DataLossError("ciphertext too short");
  }
  size_t body = sealed.size() - kAeadOverhead;
  Bytes plain(body);
  Bytes tag(sealed.end() - kAeadTagSize, sealed.end());

  CipherCtx ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes().data(),
                     sealed.data());
  EVP_DecryptUpdate(ctx.get(), plain.data(), &len,
                    sealed.data() + kAeadNonceSize, static_cast<int>(body));
  EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize,
                      tag.data());
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &len) != 1) {
    return absl::DataLossError("authentication failure");
  }
  return plain;
}

}  // namespace carsec::crypto
