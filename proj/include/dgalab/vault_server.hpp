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

// Plain-HTTP access service over a sealed container. TLS is expected to be
// terminated by a reverse proxy in front of it.

#ifndef DGALAB_VAULT_SERVER_HPP
#define DGALAB_VAULT_SERVER_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "dgalab/vault.hpp"

namespace dgalab::vault {

inline constexpr std::size_t kMaxRequestBytes = 64 * 1024;

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

/// Body of POST /access:
///   {"role": str, "passphrase": str, "section": "blacklist"|"general_info"|"metadata"|"all",
///    "attributes": {str: str}}
/// 200 {"domain_blacklist": [...], "general_info": {...}, "metadata": {...}}
/// 400 malformed, 401 bad_credentials, 403 policy_denial|attribute_denial.
/// Stateless and thread-safe.
HttpReply handle_access_request(const SealedContainer& container, std::string_view body);

class VaultServer {
 public:
  explicit VaultServer(std::shared_ptr<const SealedContainer> container);
  ~VaultServer();
  VaultServer(const VaultServer&) = delete;
  VaultServer& operator=(const VaultServer&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dgalab::vault

#endif  // DGALAB_VAULT_SERVER_HPP
