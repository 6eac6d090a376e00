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

// Signed, section-encrypted blacklist container with role/attribute access
// control.
//
// Every section is encrypted (AES-256-GCM) under its own random data key.
// Each role's passphrase is stretched with scrypt into a key-encryption key
// that wraps the data keys of the sections the role may read; roles without
// access to a section have no wrapped entry for it at all. The whole file is
// signed with Ed25519.
//
// Layout (little-endian):
//   "PSPD" | u16 version | u8 signature scheme | u8 kdf id | u8 log2 N | u32 r | u32 p
//   container id [16] | kdf salt [16]
//   u8 role count   { u8 name len | name | verifier [32] | attr nonce [12] | u32 len | attr blob }
//   u8 section count { u8 section | u64 offset | u64 length | nonce [12] }
//   u16 wrap count  { u8 role index | u8 section | nonce [12] | wrapped key [48] }
//   section ciphertexts (offsets relative to the start of this area)
//   signature [64] over every preceding byte

#ifndef DGALAB_VAULT_HPP
#define DGALAB_VAULT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

typedef struct evp_pkey_st EVP_PKEY;

namespace dgalab::vault {

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::string_view kAdministrator = "Administrator";
inline constexpr std::string_view kUser = "User";

enum class SectionName : std::uint8_t { DomainBlacklist = 0, GeneralInfo = 1, Metadata = 2 };
inline constexpr std::array<SectionName, 3> kAllSections = {
    SectionName::DomainBlacklist, SectionName::GeneralInfo, SectionName::Metadata};

/// "domain_blacklist" | "general_info" | "metadata"
std::string_view section_key(SectionName s);
std::optional<SectionName> parse_section_key(std::string_view key);

struct RolePolicy {
  std::set<SectionName> sections;
  /// Exact-match allow-lists; an empty list places no constraint.
  std::map<std::string, std::vector<std::string>> attributes;

  bool attributes_allow(const std::map<std::string, std::string>& supplied) const;
};

struct AccessPolicy {
  std::map<std::string, RolePolicy> roles;

  /// Administrator reads every section, User reads only the blacklist.
  static AccessPolicy standard();
  /// Throws a Policy error unless Administrator and User rows match the
  /// standard table. Additional roles need a non-empty section set.
  void validate() const;

  nlohmann::json to_json() const;
  static AccessPolicy from_json(const nlohmann::json& j);
};

struct BlacklistEntry {
  std::string domain;
  std::string family;
  double score = 0.0;

  friend bool operator==(const BlacklistEntry&, const BlacklistEntry&) = default;
};

/// "domain,family,score" header followed by one row per entry.
std::string blacklist_to_csv(const std::vector<BlacklistEntry>& entries);
std::vector<BlacklistEntry> parse_blacklist_csv(std::string_view csv);

class PublicKey {
 public:
  static PublicKey load_pem(const std::filesystem::path& path);
  static PublicKey from_pem(std::string_view pem);
  std::string to_pem() const;
  EVP_PKEY* get() const { return key_.get(); }

 private:
  friend class SigningKey;
  std::shared_ptr<EVP_PKEY> key_;
};

/// Ed25519 publisher key.
class SigningKey {
 public:
  static SigningKey generate();
  static SigningKey load_pem(const std::filesystem::path& path);
  static SigningKey from_pem(std::string_view pem);
  std::string to_pem() const;
  PublicKey public_key() const;
  EVP_PKEY* get() const { return key_.get(); }

 private:
  std::shared_ptr<EVP_PKEY> key_;
};

struct KdfParams {
  std::uint8_t log2_n = 14;
  std::uint32_t r = 8;
  std::uint32_t p = 1;
};

struct SectionPlaintexts {
  std::string domain_blacklist;  // CSV
  std::string general_info;      // JSON object
};

/// Seals the two data sections plus the policy (as the Metadata section).
/// Fresh random keys, salts and nonces on every call.
std::vector<std::uint8_t> pack(const SectionPlaintexts& sections, const AccessPolicy& policy,
                               const std::map<std::string, std::string>& credentials,
                               const SigningKey& signer, const KdfParams& kdf = {});

std::vector<std::uint8_t> pack(const std::vector<BlacklistEntry>& blacklist,
                               const nlohmann::json& general_info, const AccessPolicy& policy,
                               const std::map<std::string, std::string>& credentials,
                               const SigningKey& signer, const KdfParams& kdf = {});

enum class VerifyStatus { Ok, BadMagic, BadVersion, Structure, Signature };
std::string_view to_string(VerifyStatus s);

struct VerifyResult {
  VerifyStatus status = VerifyStatus::Ok;
  std::string detail;

  bool ok() const { return status == VerifyStatus::Ok; }
};

/// Magic, version, structural bounds, then the signature.
VerifyResult verify(std::span<const std::uint8_t> container, const PublicKey& publisher);

enum class Denial { None, BadCredentials, PolicyDenial, AttributeDenial };
/// "bad_credentials" | "policy_denial" | "attribute_denial"
std::string_view to_string(Denial d);

struct UnsealResult {
  std::optional<std::string> plaintext;
  Denial denial = Denial::None;

  bool ok() const { return plaintext.has_value(); }
};

struct WrapEntry {
  std::string role;
  SectionName section;
};

class SealedContainer;

/// Authenticated role: holds the derived key-encryption key until destroyed
/// (the key bytes are wiped on destruction).
class Session {
 public:
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  ~Session();

  UnsealResult read(SectionName section) const;
  const std::string& role() const { return role_; }

 private:
  friend class SealedContainer;
  Session(const SealedContainer& c, std::size_t role_index, std::array<std::uint8_t, 32> kek);

  const SealedContainer* container_;
  std::size_t role_index_;
  std::string role_;
  std::array<std::uint8_t, 32> kek_;
};

struct AuthResult {
  std::optional<Session> session;
  Denial denial = Denial::None;
};

/// A verified, parsed, immutable container. Safe to share across threads.
class SealedContainer {
 public:
  /// Throws a Crypto error (with the VerifyStatus in the message) unless
  /// verify() succeeds.
  static SealedContainer open(std::vector<std::uint8_t> bytes, const PublicKey& publisher);

  /// Authentication (passphrase) precedes the attribute check.
  AuthResult authenticate(std::string_view role, std::string_view passphrase,
                          const std::map<std::string, std::string>& attributes) const;

  UnsealResult unseal(std::string_view role, std::string_view passphrase,
                      const std::map<std::string, std::string>& attributes,
                      SectionName section) const;

  std::vector<WrapEntry> wrapped_keys() const;
  /// Every AEAD nonce in the file (sections, key wraps, attribute blobs).
  std::vector<std::array<std::uint8_t, 12>> nonces() const;
  std::vector<std::string> roles() const;
  std::span<const std::uint8_t> section_ciphertext(SectionName s) const;
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  struct Role {
    std::string name;
    std::array<std::uint8_t, 32> verifier;
    std::array<std::uint8_t, 12> attr_nonce;
    std::vector<std::uint8_t> attr_blob;
  };
  struct Section {
    SectionName name;
    std::uint64_t offset;
    std::uint64_t length;
    std::array<std::uint8_t, 12> nonce;
  };
  struct Wrap {
    std::uint8_t role_index;
    SectionName section;
    std::array<std::uint8_t, 12> nonce;
    std::array<std::uint8_t, 48> wrapped;
  };
  struct Layout {
    KdfParams kdf;
    std::array<std::uint8_t, 16> container_id;
    std::array<std::uint8_t, 16> salt;
    std::vector<Role> roles;
    std::vector<Section> sections;
    std::vector<Wrap> wraps;
    std::size_t ciphertext_start = 0;
  };

 private:
  friend class Session;
  SealedContainer() = default;

  std::vector<std::uint8_t> bytes_;
  Layout layout_;
};

}  // namespace dgalab::vault

#endif  // DGALAB_VAULT_HPP
