// Copyright 2026 The dgalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dgalab/vault.hpp"

#include <openssl/bio.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/pem.h>
#include <openssl/rand.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <sstream>

#include "bytes.hpp"
#include "dgalab/common.hpp"

namespace dgalab::vault {
namespace {

constexpr std::string_view kMagic = "PSPD";
constexpr std::uint8_t kSigEd25519 = 1;
constexpr std::uint8_t kKdfScrypt = 1;
constexpr std::size_t kSignatureSize = 64;
constexpr std::size_t kTagSize = 16;
constexpr std::size_t kKeySize = 32;

using Nonce = std::array<std::uint8_t, 12>;
using Key = std::array<std::uint8_t, kKeySize>;

template <std::size_t N>
struct Wiped {
  std::array<std::uint8_t, N> bytes{};
  Wiped() = default;
  Wiped(const Wiped&) = delete;
  Wiped& operator=(const Wiped&) = delete;
  ~Wiped() { OPENSSL_cleanse(bytes.data(), bytes.size()); }
};

[[noreturn]] void crypto_fail(const std::string& what) { fail(ErrorKind::Crypto, what); }

void random_bytes(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    crypto_fail("random number generation failed");
}

struct CipherCtx {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  CipherCtx() {
    if (!ctx) crypto_fail("EVP_CIPHER_CTX_new failed");
  }
  ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
};

// AES-256-GCM; output is ciphertext || 16-byte tag.
std::vector<std::uint8_t> aead_seal(std::span<const std::uint8_t> key, const Nonce& nonce,
                                    std::span<const std::uint8_t> aad,
                                    std::span<const std::uint8_t> plaintext) {
  CipherCtx c;
  int len = 0;
  std::vector<std::uint8_t> out(plaintext.size() + kTagSize);
  if (EVP_EncryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                          nullptr) != 1 ||
      EVP_EncryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) != 1)
    crypto_fail("AES-GCM init failed");
  if (!aad.empty() &&
      EVP_EncryptUpdate(c.ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    crypto_fail("AES-GCM aad failed");
  int written = 0;
  if (!plaintext.empty()) {
    if (EVP_EncryptUpdate(c.ctx, out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
      crypto_fail("AES-GCM encrypt failed");
    written = len;
  }
  if (EVP_EncryptFinal_ex(c.ctx, out.data() + written, &len) != 1)
    crypto_fail("AES-GCM final failed");
  written += len;
  if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, kTagSize, out.data() + written) != 1)
    crypto_fail("AES-GCM tag failed");
  out.resize(static_cast<std::size_t>(written) + kTagSize);
  return out;
}

std::optional<std::vector<std::uint8_t>> aead_open(std::span<const std::uint8_t> key,
                                                   const Nonce& nonce,
                                                   std::span<const std::uint8_t> aad,
                                                   std::span<const std::uint8_t> sealed) {
  if (sealed.size() < kTagSize) return std::nullopt;
  const std::size_t n = sealed.size() - kTagSize;
  CipherCtx c;
  int len = 0;
  std::vector<std::uint8_t> out(n);
  if (EVP_DecryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                          nullptr) != 1 ||
      EVP_DecryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) != 1)
    crypto_fail("AES-GCM init failed");
  if (!aad.empty() &&
      EVP_DecryptUpdate(c.ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    return std::nullopt;
  int written = 0;
  if (n > 0) {
    if (EVP_DecryptUpdate(c.ctx, out.data(), &len, sealed.data(), static_cast<int>(n)) != 1)
      return std::nullopt;
    written = len;
  }
  std::array<std::uint8_t, kTagSize> tag{};
  std::copy(sealed.end() - kTagSize, sealed.end(), tag.begin());
  if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) != 1)
    return std::nullopt;
  if (EVP_DecryptFinal_ex(c.ctx, out.data() + written, &len) != 1) {
    OPENSSL_cleanse(out.data(), out.size());
    return std::nullopt;
  }
  return out;
}

std::vector<std::uint8_t> bytes_of(std::string_view s) {
  return {s.begin(), s.end()};
}

// Associated data binds every ciphertext to its container and slot.
std::vector<std::uint8_t> aad_for(std::string_view purpose,
                                  const std::array<std::uint8_t, 16>& container_id,
                                  std::string_view extra) {
  std::vector<std::uint8_t> aad = bytes_of(purpose);
  aad.insert(aad.end(), container_id.begin(), container_id.end());
  aad.insert(aad.end(), extra.begin(), extra.end());
  return aad;
}

std::string section_slot(SectionName s) { return std::string(1, static_cast<char>(s)); }
std::string wrap_slot(std::string_view role, SectionName s) {
  return std::string(role) + '\0' + section_slot(s);
}

// scrypt(passphrase, salt || role) -> 64 bytes: the first half is the
// key-encryption key, the second half feeds the verifier digest.
void derive_role_keys(std::string_view passphrase, const std::array<std::uint8_t, 16>& salt,
                      std::string_view role, const KdfParams& kdf, Key& kek, Key& verifier,
                      const std::array<std::uint8_t, 16>& container_id) {
  std::vector<std::uint8_t> full_salt(salt.begin(), salt.end());
  full_salt.insert(full_salt.end(), role.begin(), role.end());
  Wiped<64> out;
  const std::uint64_t n = std::uint64_t{1} << kdf.log2_n;
  const std::uint64_t maxmem = 256 * n * kdf.r * kdf.p + (std::uint64_t{4} << 20);
  if (EVP_PBE_scrypt(passphrase.data(), passphrase.size(), full_salt.data(), full_salt.size(), n,
                     kdf.r, kdf.p, maxmem, out.bytes.data(), out.bytes.size()) != 1)
    crypto_fail("scrypt key derivation failed");
  std::copy_n(out.bytes.begin(), kKeySize, kek.begin());

  std::vector<std::uint8_t> msg = bytes_of("PSPD-verifier");
  msg.insert(msg.end(), out.bytes.begin() + kKeySize, out.bytes.end());
  msg.insert(msg.end(), container_id.begin(), container_id.end());
  unsigned int len = 0;
  if (EVP_Digest(msg.data(), msg.size(), verifier.data(), &len, EVP_sha256(), nullptr) != 1)
    crypto_fail("verifier digest failed");
  OPENSSL_cleanse(msg.data(), msg.size());
}

void validate_kdf(const KdfParams& kdf) {
  if (kdf.log2_n < 1 || kdf.log2_n > 24 || kdf.r < 1 || kdf.p < 1 || kdf.r > 64 || kdf.p > 16)
    fail(ErrorKind::Format, "scrypt parameters out of range");
}

std::shared_ptr<EVP_PKEY> wrap_pkey(EVP_PKEY* k) {
  return std::shared_ptr<EVP_PKEY>(k, EVP_PKEY_free);
}

std::string bio_to_string(BIO* bio) {
  char* data = nullptr;
  long n = BIO_get_mem_data(bio, &data);
  std::string s(data, static_cast<std::size_t>(n));
  return s;
}

std::vector<std::uint8_t> sign(const SigningKey& key, std::span<const std::uint8_t> msg) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::vector<std::uint8_t> sig(kSignatureSize);
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, msg.data(), msg.size()) != 1 ||
      len != kSignatureSize)
    crypto_fail("Ed25519 signing failed");
  return sig;
}

bool signature_valid(const PublicKey& key, std::span<const std::uint8_t> msg,
                     std::span<const std::uint8_t> sig) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
    crypto_fail("signature verification setup failed");
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

SealedContainer::Layout parse_layout(std::span<const std::uint8_t> body) {
  detail::ByteReader r(body, "container");
  SealedContainer::Layout L;
  r.str(kMagic.size());
  r.u16();
  if (r.u8() != kSigEd25519) fail(ErrorKind::Format, "unknown signature scheme");
  if (r.u8() != kKdfScrypt) fail(ErrorKind::Format, "unknown key-derivation function");
  L.kdf.log2_n = r.u8();
  L.kdf.r = r.u32();
  L.kdf.p = r.u32();
  validate_kdf(L.kdf);
  r.raw(L.container_id);
  r.raw(L.salt);

  const std::size_t role_count = r.u8();
  if (role_count == 0) fail(ErrorKind::Format, "container has no roles");
  for (std::size_t i = 0; i < role_count; ++i) {
    SealedContainer::Role role;
    role.name = r.str(r.u8());
    if (role.name.empty()) fail(ErrorKind::Format, "empty role name");
    r.raw(role.verifier);
    r.raw(role.attr_nonce);
    const std::uint32_t len = r.u32();
    if (len < kTagSize || len > r.remaining()) fail(ErrorKind::Format, "bad attribute blob length");
    role.attr_blob.resize(len);
    r.raw(role.attr_blob);
    for (const auto& other : L.roles)
      if (other.name == role.name) fail(ErrorKind::Format, "duplicate role");
    L.roles.push_back(std::move(role));
  }

  const std::size_t section_count = r.u8();
  if (section_count != kAllSections.size()) fail(ErrorKind::Format, "expected three sections");
  for (std::size_t i = 0; i < section_count; ++i) {
    SealedContainer::Section s;
    const std::uint8_t id = r.u8();
    if (id != i) fail(ErrorKind::Format, "sections out of order");
    s.name = static_cast<SectionName>(id);
    s.offset = r.u64();
    s.length = r.u64();
    r.raw(s.nonce);
    L.sections.push_back(s);
  }

  const std::size_t wrap_count = r.u16();
  for (std::size_t i = 0; i < wrap_count; ++i) {
    SealedContainer::Wrap w;
    w.role_index = r.u8();
    const std::uint8_t sid = r.u8();
    if (w.role_index >= L.roles.size() || sid >= kAllSections.size())
      fail(ErrorKind::Format, "wrapped key references unknown role or section");
    w.section = static_cast<SectionName>(sid);
    r.raw(w.nonce);
    r.raw(w.wrapped);
    for (const auto& other : L.wraps)
      if (other.role_index == w.role_index && other.section == w.section)
        fail(ErrorKind::Format, "duplicate wrapped key");
    L.wraps.push_back(w);
  }

  // Ciphertexts are contiguous, in section order, and fill the rest of the body.
  L.ciphertext_start = r.position();
  std::uint64_t expected_offset = 0;
  for (const auto& s : L.sections) {
    if (s.offset != expected_offset || s.length < kTagSize || s.length > r.remaining())
      fail(ErrorKind::Format, "section bounds invalid");
    expected_offset += s.length;
    if (expected_offset > r.remaining()) fail(ErrorKind::Format, "section bounds invalid");
  }
  if (expected_offset != r.remaining()) fail(ErrorKind::Format, "trailing bytes after sections");
  return L;
}

}  // namespace

std::string_view section_key(SectionName s) {
  switch (s) {
    case SectionName::DomainBlacklist: return "domain_blacklist";
    case SectionName::GeneralInfo: return "general_info";
    case SectionName::Metadata: return "metadata";
  }
  return "unknown";
}

std::optional<SectionName> parse_section_key(std::string_view key) {
  for (auto s : kAllSections)
    if (section_key(s) == key) return s;
  return std::nullopt;
}

bool RolePolicy::attributes_allow(const std::map<std::string, std::string>& supplied) const {
  for (const auto& [key, allowed] : attributes) {
    if (allowed.empty()) continue;
    auto it = supplied.find(key);
    if (it == supplied.end()) return false;
    if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end()) return false;
  }
  return true;
}

AccessPolicy AccessPolicy::standard() {
  AccessPolicy p;
  p.roles[std::string(kAdministrator)].sections = {kAllSections.begin(), kAllSections.end()};
  p.roles[std::string(kUser)].sections = {SectionName::DomainBlacklist};
  return p;
}

void AccessPolicy::validate() const {
  auto admin = roles.find(std::string(kAdministrator));
  auto user = roles.find(std::string(kUser));
  if (admin == roles.end() || user == roles.end())
    fail(ErrorKind::Policy, "policy must define the Administrator and User roles");
  if (admin->second.sections != std::set<SectionName>(kAllSections.begin(), kAllSections.end()))
    fail(ErrorKind::Policy, "Administrator must be allowed every section");
  if (user->second.sections != std::set<SectionName>{SectionName::DomainBlacklist})
    fail(ErrorKind::Policy, "User must be allowed exactly the domain blacklist");
  if (roles.size() > 255) fail(ErrorKind::Policy, "too many roles");
  for (const auto& [name, rp] : roles) {
    if (name.empty() || name.size() > 255) fail(ErrorKind::Policy, "role names must be 1-255 bytes");
    if (rp.sections.empty()) fail(ErrorKind::Policy, "role '" + name + "' has no sections");
  }
}

nlohmann::json AccessPolicy::to_json() const {
  nlohmann::json roles_json = nlohmann::json::object();
  for (const auto& [name, rp] : roles) {
    nlohmann::json sections = nlohmann::json::array();
    for (auto s : rp.sections) sections.push_back(section_key(s));
    roles_json[name] = {{"sections", sections}, {"attributes", rp.attributes}};
  }
  return {{"roles", roles_json}};
}

AccessPolicy AccessPolicy::from_json(const nlohmann::json& j) {
  AccessPolicy p;
  try {
    for (const auto& [name, spec] : j.at("roles").items()) {
      RolePolicy rp;
      for (const auto& s : spec.at("sections")) {
        auto sec = parse_section_key(s.get<std::string>());
        if (!sec) fail(ErrorKind::Policy, "unknown section '" + s.get<std::string>() + "'");
        rp.sections.insert(*sec);
      }
      if (spec.contains("attributes"))
        rp.attributes = spec.at("attributes").get<std::map<std::string, std::vector<std::string>>>();
      p.roles[name] = std::move(rp);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Policy, std::string("malformed policy: ") + e.what());
  }
  return p;
}

std::string blacklist_to_csv(const std::vector<BlacklistEntry>& entries) {
  std::string out = "domain,family,score\n";
  for (const auto& e : entries) {
    if (e.domain.find_first_of(",\n") != std::string::npos ||
        e.family.find_first_of(",\n") != std::string::npos)
      fail(ErrorKind::Format, "blacklist fields may not contain commas or newlines");
    out += e.domain + ',' + e.family + ',' + format_double(e.score) + '\n';
  }
  return out;
}

std::vector<BlacklistEntry> parse_blacklist_csv(std::string_view csv) {
  std::vector<BlacklistEntry> out;
  std::size_t lineno = 0;
  while (!csv.empty()) {
    auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv.remove_prefix(nl == std::string_view::npos ? csv.size() : nl + 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || (lineno == 1 && line == "domain,family,score")) continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      fail(ErrorKind::Format, "blacklist row " + std::to_string(lineno) + ": expected 3 fields");
    BlacklistEntry e{std::string(line.substr(0, c1)), std::string(line.substr(c1 + 1, c2 - c1 - 1)),
                     0.0};
    auto score = line.substr(c2 + 1);
    auto [ptr, ec] = std::from_chars(score.data(), score.data() + score.size(), e.score);
    if (ec != std::errc() || ptr != score.data() + score.size())
      fail(ErrorKind::Format, "blacklist row " + std::to_string(lineno) + ": bad score");
    out.push_back(std::move(e));
  }
  return out;
}

PublicKey PublicKey::from_pem(std::string_view pem) {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())),
                                                BIO_free);
  EVP_PKEY* k = bio ? PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr) : nullptr;
  if (!k) crypto_fail("cannot parse public key PEM");
  PublicKey pk;
  pk.key_ = wrap_pkey(k);
  if (EVP_PKEY_get_id(k) != EVP_PKEY_ED25519) crypto_fail("public key is not Ed25519");
  return pk;
}

PublicKey PublicKey::load_pem(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return from_pem(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string PublicKey::to_pem() const {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new(BIO_s_mem()), BIO_free);
  if (!bio || PEM_write_bio_PUBKEY(bio.get(), key_.get()) != 1) crypto_fail("cannot write PEM");
  return bio_to_string(bio.get());
}

SigningKey SigningKey::generate() {
  EVP_PKEY* k = EVP_PKEY_Q_keygen(nullptr, nullptr, "ED25519");
  if (!k) crypto_fail("Ed25519 key generation failed");
  SigningKey sk;
  sk.key_ = wrap_pkey(k);
  return sk;
}

SigningKey SigningKey::from_pem(std::string_view pem) {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())),
                                                BIO_free);
  EVP_PKEY* k = bio ? PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr) : nullptr;
  if (!k) crypto_fail("cannot parse private key PEM");
  SigningKey sk;
  sk.key_ = wrap_pkey(k);
  if (EVP_PKEY_get_id(k) != EVP_PKEY_ED25519) crypto_fail("signing key is not Ed25519");
  return sk;
}

SigningKey SigningKey::load_pem(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  auto key = from_pem(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  OPENSSL_cleanse(bytes.data(), bytes.size());
  return key;
}

std::string SigningKey::to_pem() const {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new(BIO_s_mem()), BIO_free);
  if (!bio || PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr,
                                       nullptr) != 1)
    crypto_fail("cannot write PEM");
  return bio_to_string(bio.get());
}

PublicKey SigningKey::public_key() const {
  // Round-trip through DER to obtain a public-only key object.
  unsigned char* der = nullptr;
  int len = i2d_PUBKEY(key_.get(), &der);
  if (len <= 0) crypto_fail("cannot export public key");
  const unsigned char* p = der;
  EVP_PKEY* k = d2i_PUBKEY(nullptr, &p, len);
  OPENSSL_free(der);
  if (!k) crypto_fail("cannot import public key");
  PublicKey pk;
  pk.key_ = wrap_pkey(k);
  return pk;
}

std::vector<std::uint8_t> pack(const SectionPlaintexts& sections, const AccessPolicy& policy,
                               const std::map<std::string, std::string>& credentials,
                               const SigningKey& signer, const KdfParams& kdf) {
  policy.validate();
  validate_kdf(kdf);
  for (const auto& [role, rp] : policy.roles) {
    auto it = credentials.find(role);
    if (it == credentials.end()) fail(ErrorKind::Config, "no passphrase for role '" + role + "'");
    if (it->second.empty()) fail(ErrorKind::Config, "empty passphrase for role '" + role + "'");
  }
  const std::string metadata = policy.to_json().dump(2) + "\n";
  const std::array<const std::string*, 3> plaintext = {&sections.domain_blacklist,
                                                       &sections.general_info, &metadata};

  SealedContainer::Layout L;
  L.kdf = kdf;
  random_bytes(L.container_id);
  random_bytes(L.salt);

  std::set<Nonce> used;
  auto fresh_nonce = [&] {
    Nonce n{};
    do random_bytes(n);
    while (!used.insert(n).second);
    return n;
  };

  std::array<Wiped<kKeySize>, 3> data_keys;
  std::vector<std::vector<std::uint8_t>> ciphertexts;
  std::uint64_t offset = 0;
  for (auto s : kAllSections) {
    const auto idx = static_cast<std::size_t>(s);
    random_bytes(data_keys[idx].bytes);
    SealedContainer::Section sec{s, offset, 0, fresh_nonce()};
    const auto* text = plaintext[idx];
    auto ct = aead_seal(data_keys[idx].bytes, sec.nonce, aad_for("PSPD-section", L.container_id, section_slot(s)),
                        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text->data()),
                                                      text->size()));
    sec.length = ct.size();
    offset += ct.size();
    L.sections.push_back(sec);
    ciphertexts.push_back(std::move(ct));
  }

  for (const auto& [name, rp] : policy.roles) {
    SealedContainer::Role role;
    role.name = name;
    Wiped<kKeySize> kek;
    derive_role_keys(credentials.at(name), L.salt, name, kdf, kek.bytes, role.verifier,
                     L.container_id);
    role.attr_nonce = fresh_nonce();
    const std::string attrs = nlohmann::json(rp.attributes).dump();
    role.attr_blob = aead_seal(kek.bytes, role.attr_nonce, aad_for("PSPD-attrs", L.container_id, name),
                               bytes_of(attrs));
    const auto role_index = static_cast<std::uint8_t>(L.roles.size());
    for (auto s : rp.sections) {
      SealedContainer::Wrap w{role_index, s, fresh_nonce(), {}};
      auto wrapped = aead_seal(kek.bytes, w.nonce, aad_for("PSPD-wrap", L.container_id, wrap_slot(name, s)),
                               data_keys[static_cast<std::size_t>(s)].bytes);
      std::copy(wrapped.begin(), wrapped.end(), w.wrapped.begin());
      L.wraps.push_back(w);
    }
    L.roles.push_back(std::move(role));
  }

  detail::ByteWriter w;
  w.raw(kMagic);
  w.u16(kContainerVersion);
  w.u8(kSigEd25519);
  w.u8(kKdfScrypt);
  w.u8(kdf.log2_n);
  w.u32(kdf.r);
  w.u32(kdf.p);
  w.raw(L.container_id);
  w.raw(L.salt);
  w.u8(static_cast<std::uint8_t>(L.roles.size()));
  for (const auto& r : L.roles) {
    w.u8(static_cast<std::uint8_t>(r.name.size()));
    w.raw(r.name);
    w.raw(r.verifier);
    w.raw(r.attr_nonce);
    w.u32(static_cast<std::uint32_t>(r.attr_blob.size()));
    w.raw(r.attr_blob);
  }
  w.u8(static_cast<std::uint8_t>(L.sections.size()));
  for (const auto& s : L.sections) {
    w.u8(static_cast<std::uint8_t>(s.name));
    w.u64(s.offset);
    w.u64(s.length);
    w.raw(s.nonce);
  }
  w.u16(static_cast<std::uint16_t>(L.wraps.size()));
  for (const auto& wr : L.wraps) {
    w.u8(wr.role_index);
    w.u8(static_cast<std::uint8_t>(wr.section));
    w.raw(wr.nonce);
    w.raw(wr.wrapped);
  }
  for (const auto& ct : ciphertexts) w.raw(ct);
  auto sig = sign(signer, w.bytes());
  w.raw(sig);
  return std::move(w.bytes());
}

std::vector<std::uint8_t> pack(const std::vector<BlacklistEntry>& blacklist,
                               const nlohmann::json& general_info, const AccessPolicy& policy,
                               const std::map<std::string, std::string>& credentials,
                               const SigningKey& signer, const KdfParams& kdf) {
  return pack(SectionPlaintexts{blacklist_to_csv(blacklist), general_info.dump(2) + "\n"}, policy,
              credentials, signer, kdf);
}

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Ok: return "ok";
    case VerifyStatus::BadMagic: return "bad_magic";
    case VerifyStatus::BadVersion: return "bad_version";
    case VerifyStatus::Structure: return "structure";
    case VerifyStatus::Signature: return "signature";
  }
  return "unknown";
}

std::string_view to_string(Denial d) {
  switch (d) {
    case Denial::None: return "none";
    case Denial::BadCredentials: return "bad_credentials";
    case Denial::PolicyDenial: return "policy_denial";
    case Denial::AttributeDenial: return "attribute_denial";
  }
  return "unknown";
}

VerifyResult verify(std::span<const std::uint8_t> container, const PublicKey& publisher) {
  if (container.size() < kMagic.size() + 2 ||
      std::memcmp(container.data(), kMagic.data(), kMagic.size()) != 0)
    return {VerifyStatus::BadMagic, "not a sealed container"};
  const auto version = static_cast<std::uint16_t>(container[4] | (container[5] << 8));
  if (version != kContainerVersion)
    return {VerifyStatus::BadVersion, "unsupported container version " + std::to_string(version)};
  if (container.size() < kSignatureSize + 6)
    return {VerifyStatus::Structure, "container truncated"};
  auto body = container.first(container.size() - kSignatureSize);
  try {
    parse_layout(body);
  } catch (const Error& e) {
    return {VerifyStatus::Structure, e.what()};
  }
  if (!signature_valid(publisher, body, container.last(kSignatureSize)))
    return {VerifyStatus::Signature, "signature does not verify"};
  return {};
}

SealedContainer SealedContainer::open(std::vector<std::uint8_t> bytes, const PublicKey& publisher) {
  auto v = verify(bytes, publisher);
  if (!v.ok())
    fail(ErrorKind::Crypto, "container verification failed (" + std::string(to_string(v.status)) +
                                "): " + v.detail);
  SealedContainer c;
  c.layout_ = parse_layout(std::span<const std::uint8_t>(bytes).first(bytes.size() - kSignatureSize));
  c.bytes_ = std::move(bytes);
  return c;
}

Session::Session(const SealedContainer& c, std::size_t role_index, std::array<std::uint8_t, 32> kek)
    : container_(&c), role_index_(role_index), role_(c.layout_.roles[role_index].name), kek_(kek) {}

Session::Session(Session&& o) noexcept
    : container_(o.container_), role_index_(o.role_index_), role_(std::move(o.role_)), kek_(o.kek_) {
  OPENSSL_cleanse(o.kek_.data(), o.kek_.size());
}

Session& Session::operator=(Session&& o) noexcept {
  if (this != &o) {
    container_ = o.container_;
    role_index_ = o.role_index_;
    role_ = std::move(o.role_);
    kek_ = o.kek_;
    OPENSSL_cleanse(o.kek_.data(), o.kek_.size());
  }
  return *this;
}

Session::~Session() { OPENSSL_cleanse(kek_.data(), kek_.size()); }

UnsealResult Session::read(SectionName section) const {
  const auto& L = container_->layout_;
  auto wrap = std::find_if(L.wraps.begin(), L.wraps.end(), [&](const SealedContainer::Wrap& w) {
    return w.role_index == role_index_ && w.section == section;
  });
  if (wrap == L.wraps.end()) return {std::nullopt, Denial::PolicyDenial};

  auto data_key = aead_open(kek_, wrap->nonce,
                            aad_for("PSPD-wrap", L.container_id, wrap_slot(role_, section)),
                            wrap->wrapped);
  if (!data_key || data_key->size() != kKeySize) crypto_fail("wrapped key failed authentication");
  const auto& sec = L.sections[static_cast<std::size_t>(section)];
  auto plain = aead_open(*data_key, sec.nonce,
                         aad_for("PSPD-section", L.container_id, section_slot(section)),
                         container_->section_ciphertext(section));
  OPENSSL_cleanse(data_key->data(), data_key->size());
  if (!plain) crypto_fail("section failed authentication");
  UnsealResult r;
  r.plaintext = std::string(plain->begin(), plain->end());
  OPENSSL_cleanse(plain->data(), plain->size());
  return r;
}

AuthResult SealedContainer::authenticate(std::string_view role, std::string_view passphrase,
                                         const std::map<std::string, std::string>& attributes) const {
  auto it = std::find_if(layout_.roles.begin(), layout_.roles.end(),
                         [&](const Role& r) { return r.name == role; });
  Key kek{};
  Key verifier{};
  // Unknown roles still pay for a derivation so they look like a wrong passphrase.
  derive_role_keys(passphrase, layout_.salt, it == layout_.roles.end() ? std::string_view("\x01") : role,
                   layout_.kdf, kek, verifier, layout_.container_id);
  if (it == layout_.roles.end() ||
      CRYPTO_memcmp(verifier.data(), it->verifier.data(), verifier.size()) != 0) {
    OPENSSL_cleanse(kek.data(), kek.size());
    return {std::nullopt, Denial::BadCredentials};
  }
  const auto role_index = static_cast<std::size_t>(it - layout_.roles.begin());
  Session session(*this, role_index, kek);
  OPENSSL_cleanse(kek.data(), kek.size());

  auto attrs_plain = aead_open(session.kek_, it->attr_nonce,
                               aad_for("PSPD-attrs", layout_.container_id, it->name), it->attr_blob);
  if (!attrs_plain) crypto_fail("attribute constraints failed authentication");
  RolePolicy rp;
  try {
    rp.attributes = nlohmann::json::parse(attrs_plain->begin(), attrs_plain->end())
                        .get<std::map<std::string, std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("attribute constraints malformed: ") + e.what());
  }
  if (!rp.attributes_allow(attributes)) return {std::nullopt, Denial::AttributeDenial};
  return {std::move(session), Denial::None};
}

UnsealResult SealedContainer::unseal(std::string_view role, std::string_view passphrase,
                                     const std::map<std::string, std::string>& attributes,
                                     SectionName section) const {
  auto auth = authenticate(role, passphrase, attributes);
  if (!auth.session) return {std::nullopt, auth.denial};
  return auth.session->read(section);
}

std::vector<WrapEntry> SealedContainer::wrapped_keys() const {
  std::vector<WrapEntry> out;
  for (const auto& w : layout_.wraps) out.push_back({layout_.roles[w.role_index].name, w.section});
  return out;
}

std::vector<std::array<std::uint8_t, 12>> SealedContainer::nonces() const {
  std::vector<Nonce> out;
  for (const auto& s : layout_.sections) out.push_back(s.nonce);
  for (const auto& w : layout_.wraps) out.push_back(w.nonce);
  for (const auto& r : layout_.roles) out.push_back(r.attr_nonce);
  return out;
}

std::vector<std::string> SealedContainer::roles() const {
  std::vector<std::string> out;
  for (const auto& r : layout_.roles) out.push_back(r.name);
  return out;
}

std::span<const std::uint8_t> SealedContainer::section_ciphertext(SectionName s) const {
  const auto& sec = layout_.sections[static_cast<std::size_t>(s)];
  return std::span<const std::uint8_t>(bytes_).subspan(layout_.ciphertext_start + sec.offset,
                                                       sec.length);
}

}  // namespace dgalab::vault
