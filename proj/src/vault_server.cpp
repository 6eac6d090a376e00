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

#include "dgalab/vault_server.hpp"

#include <httplib.h>

#include <vector>

#include "dgalab/common.hpp"

namespace dgalab::vault {
namespace {

HttpReply error_reply(int status, std::string_view code) {
  return {status, nlohmann::json{{"error", code}}.dump()};
}

nlohmann::json section_json(SectionName s, const std::string& plaintext) {
  if (s == SectionName::DomainBlacklist) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : parse_blacklist_csv(plaintext))
      rows.push_back({{"domain", e.domain}, {"family", e.family}, {"score", e.score}});
    return rows;
  }
  return nlohmann::json::parse(plaintext);
}

}  // namespace

HttpReply handle_access_request(const SealedContainer& container, std::string_view body) {
  if (body.size() > kMaxRequestBytes) return error_reply(413, "payload_too_large");
  std::string role, passphrase, section;
  std::map<std::string, std::string> attributes;
  try {
    auto j = nlohmann::json::parse(body);
    role = j.at("role").get<std::string>();
    passphrase = j.at("passphrase").get<std::string>();
    section = j.at("section").get<std::string>();
    if (j.contains("attributes"))
      attributes = j.at("attributes").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception&) {
    return error_reply(400, "malformed_request");
  }

  std::vector<SectionName> wanted;
  const bool all = section == "all";
  if (all) {
    wanted.assign(kAllSections.begin(), kAllSections.end());
  } else if (section == "blacklist" || section == "domain_blacklist") {
    wanted.push_back(SectionName::DomainBlacklist);
  } else if (auto s = parse_section_key(section)) {
    wanted.push_back(*s);
  } else {
    return error_reply(400, "unknown_section");
  }

  try {
    auto auth = container.authenticate(role, passphrase, attributes);
    if (!auth.session)
      return error_reply(auth.denial == Denial::BadCredentials ? 401 : 403, to_string(auth.denial));
    nlohmann::json out = nlohmann::json::object();
    for (auto s : wanted) {
      auto r = auth.session->read(s);
      if (!r.ok()) {
        if (all) continue;
        return error_reply(403, to_string(r.denial));
      }
      out[std::string(section_key(s))] = section_json(s, *r.plaintext);
    }
    if (out.empty()) return error_reply(403, to_string(Denial::PolicyDenial));
    return {200, out.dump()};
  } catch (const std::exception&) {
    return error_reply(500, "internal_error");
  }
}

struct VaultServer::Impl {
  std::shared_ptr<const SealedContainer> container;
  httplib::Server server;
};

VaultServer::VaultServer(std::shared_ptr<const SealedContainer> container)
    : impl_(std::make_unique<Impl>()) {
  if (!container) fail(ErrorKind::Config, "server needs a container");
  impl_->container = std::move(container);
  auto& srv = impl_->server;
  srv.set_payload_max_length(kMaxRequestBytes);
  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  const SealedContainer* c = impl_->container.get();
  srv.Post("/access", [c](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle_access_request(*c, req.body);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
}

VaultServer::~VaultServer() { stop(); }

int VaultServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : port;
  if (port != 0 && !impl_->server.bind_to_port(host, port)) bound = -1;
  if (bound < 0) fail(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void VaultServer::listen() { impl_->server.listen_after_bind(); }

void VaultServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace dgalab::vault
