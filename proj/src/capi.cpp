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

#include "dgalab/dgalab.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "dgalab/adversary.hpp"
#include "dgalab/common.hpp"
#include "dgalab/corpus.hpp"
#include "dgalab/metrics.hpp"
#include "dgalab/network.hpp"
#include "dgalab/trainer.hpp"
#include "dgalab/vault.hpp"
#include "dgalab/vault_server.hpp"

using namespace dgalab;

struct dgalab_corpus {
  std::vector<corpus::RawDomainRecord> records;
};

struct dgalab_split {
  corpus::DatasetSplit split;
  std::size_t rejected = 0;
};

struct dgalab_model {
  network::LstmClassifier model;
  std::optional<network::AdamState> adam;
};

struct dgalab_server {
  std::shared_ptr<const vault::SealedContainer> container;
  std::unique_ptr<vault::VaultServer> server;
};

namespace {

thread_local std::string g_last_error;

dgalab_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return DGALAB_ERR_CONFIG;
    case ErrorKind::Io: return DGALAB_ERR_IO;
    case ErrorKind::Format: return DGALAB_ERR_FORMAT;
    case ErrorKind::Domain: return DGALAB_ERR_DOMAIN;
    case ErrorKind::Numeric: return DGALAB_ERR_NUMERIC;
    case ErrorKind::Contract: return DGALAB_ERR_CONTRACT;
    case ErrorKind::Crypto: return DGALAB_ERR_CRYPTO;
    case ErrorKind::Policy: return DGALAB_ERR_POLICY;
  }
  return DGALAB_ERR_INTERNAL;
}

dgalab_status set_error(dgalab_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

template <class F>
dgalab_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(DGALAB_ERR_FORMAT, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DGALAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DGALAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(DGALAB_ERR_INTERNAL, "unknown exception");
  }
}

#define REQUIRE_ARG(p)                                                            \
  do {                                                                            \
    if ((p) == nullptr) return set_error(DGALAB_ERR_INVALID_ARGUMENT, #p " is NULL"); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

trainer::TrainConfig to_cpp(const dgalab_train_config& c) {
  trainer::TrainConfig t;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.lr = c.lr;
  t.dropout = c.dropout;
  t.seed = c.seed;
  t.dim = c.dim;
  t.hidden = c.hidden;
  return t;
}

trainer::EpochCallback to_cpp(dgalab_epoch_callback cb, void* user) {
  if (!cb) return {};
  return [cb, user](const trainer::EpochStats& s) { cb(s.epoch, s.mean_loss, s.train_accuracy, user); };
}

std::map<std::string, std::string> parse_attributes(const char* json) {
  if (!json || !*json) return {};
  return nlohmann::json::parse(json).get<std::map<std::string, std::string>>();
}

}  // namespace

extern "C" {

const char* dgalab_version(void) { return "0.1.0"; }

const char* dgalab_last_error(void) { return g_last_error.c_str(); }

const char* dgalab_status_name(dgalab_status status) {
  switch (status) {
    case DGALAB_OK: return "ok";
    case DGALAB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DGALAB_ERR_CONFIG: return "config";
    case DGALAB_ERR_IO: return "io";
    case DGALAB_ERR_FORMAT: return "format";
    case DGALAB_ERR_DOMAIN: return "domain";
    case DGALAB_ERR_NUMERIC: return "numeric";
    case DGALAB_ERR_CONTRACT: return "contract";
    case DGALAB_ERR_CRYPTO: return "crypto";
    case DGALAB_ERR_POLICY: return "policy";
    case DGALAB_ERR_DENIED: return "denied";
    case DGALAB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void dgalab_string_free(char* s) { std::free(s); }

dgalab_status dgalab_corpus_new(dgalab_corpus** out) {
  REQUIRE_ARG(out);
  return guarded([&] {
    *out = new dgalab_corpus();
    return DGALAB_OK;
  });
}

void dgalab_corpus_free(dgalab_corpus* corpus) { delete corpus; }

dgalab_status dgalab_corpus_load_benign(dgalab_corpus* corpus, const char* path, size_t limit,
                                        size_t* skipped_rows) {
  REQUIRE_ARG(corpus);
  REQUIRE_ARG(path);
  return guarded([&] {
    auto r = corpus::load_benign(path, limit == 0 ? static_cast<std::size_t>(-1) : limit);
    corpus->records.insert(corpus->records.end(), r.records.begin(), r.records.end());
    if (skipped_rows) *skipped_rows = r.skipped.size();
    return DGALAB_OK;
  });
}

dgalab_status dgalab_corpus_load_dga(dgalab_corpus* corpus, const char* path,
                                     size_t* skipped_rows) {
  REQUIRE_ARG(corpus);
  REQUIRE_ARG(path);
  return guarded([&] {
    auto r = corpus::load_dga_archive(path);
    corpus->records.insert(corpus->records.end(), r.records.begin(), r.records.end());
    if (skipped_rows) *skipped_rows = r.skipped.size();
    return DGALAB_OK;
  });
}

dgalab_status dgalab_corpus_add_synthetic_dga(dgalab_corpus* corpus, uint64_t seed,
                                              unsigned families, size_t count) {
  REQUIRE_ARG(corpus);
  if (families == 0) return set_error(DGALAB_ERR_CONFIG, "families must be >= 1");
  return guarded([&] {
    for (unsigned f = 0; f < families; ++f) {
      const std::size_t n = count / families + (f < count % families ? 1 : 0);
      auto r = corpus::synth_random_dga(seed, f, n);
      corpus->records.insert(corpus->records.end(), r.begin(), r.end());
    }
    return DGALAB_OK;
  });
}

dgalab_status dgalab_corpus_add_dictionary_dga(dgalab_corpus* corpus, uint64_t seed,
                                               const char* wordlist_path, size_t count) {
  REQUIRE_ARG(corpus);
  return guarded([&] {
    auto words = wordlist_path ? corpus::load_wordlist(wordlist_path) : corpus::default_wordlist();
    auto r = corpus::synth_dictionary_dga(seed, words, count);
    corpus->records.insert(corpus->records.end(), r.begin(), r.end());
    return DGALAB_OK;
  });
}

dgalab_status dgalab_corpus_add_synthetic_benign(dgalab_corpus* corpus, uint64_t seed,
                                                 size_t count) {
  REQUIRE_ARG(corpus);
  return guarded([&] {
    auto r = corpus::synth_benign(seed, count);
    corpus->records.insert(corpus->records.end(), r.begin(), r.end());
    return DGALAB_OK;
  });
}

dgalab_status dgalab_corpus_size(const dgalab_corpus* corpus, size_t* records) {
  REQUIRE_ARG(corpus);
  REQUIRE_ARG(records);
  *records = corpus->records.size();
  return DGALAB_OK;
}

dgalab_status dgalab_split_make(const dgalab_corpus* corpus, double train_fraction, uint64_t seed,
                                int64_t benign_cap, dgalab_split** out) {
  REQUIRE_ARG(corpus);
  REQUIRE_ARG(out);
  return guarded([&] {
    auto s = std::make_unique<dgalab_split>();
    auto samples = corpus::normalize_all(corpus->records, &s->rejected);
    corpus::SplitSpec spec{train_fraction, seed, std::nullopt};
    if (benign_cap >= 0) spec.benign_cap = static_cast<std::size_t>(benign_cap);
    s->split = corpus::make_split(samples, spec);
    *out = s.release();
    return DGALAB_OK;
  });
}

void dgalab_split_free(dgalab_split* split) { delete split; }

dgalab_status dgalab_split_sizes(const dgalab_split* split, size_t* train, size_t* test,
                                 size_t* rejected) {
  REQUIRE_ARG(split);
  if (train) *train = split->split.train.size();
  if (test) *test = split->split.test.size();
  if (rejected) *rejected = split->rejected;
  return DGALAB_OK;
}

void dgalab_train_config_default(dgalab_train_config* cfg) {
  if (!cfg) return;
  trainer::TrainConfig t;
  *cfg = {t.epochs, t.batch_size, t.lr, t.dropout, t.seed, t.dim, t.hidden};
}

dgalab_status dgalab_train(const dgalab_split* split, const dgalab_train_config* cfg,
                           dgalab_epoch_callback cb, void* user, dgalab_model** out,
                           char** log_json) {
  REQUIRE_ARG(split);
  REQUIRE_ARG(cfg);
  REQUIRE_ARG(out);
  return guarded([&] {
    auto r = trainer::train(split->split, to_cpp(*cfg), to_cpp(cb, user));
    auto m = std::make_unique<dgalab_model>(dgalab_model{std::move(r.model), std::move(r.adam)});
    put_string(log_json, trainer::to_json(r.log).dump(1) + "\n");
    *out = m.release();
    return DGALAB_OK;
  });
}

void dgalab_model_free(dgalab_model* model) { delete model; }

dgalab_status dgalab_model_load(const char* path, dgalab_model** out) {
  REQUIRE_ARG(path);
  REQUIRE_ARG(out);
  return guarded([&] {
    auto ck = network::load_checkpoint(path);
    *out = new dgalab_model{std::move(ck.model), std::move(ck.adam)};
    return DGALAB_OK;
  });
}

dgalab_status dgalab_model_save(const dgalab_model* model, const char* path) {
  REQUIRE_ARG(model);
  REQUIRE_ARG(path);
  return guarded([&] {
    network::save_checkpoint(model->model, model->adam ? &*model->adam : nullptr, path);
    return DGALAB_OK;
  });
}

dgalab_status dgalab_model_score(const dgalab_model* model, const char* name,
                                 double* probability) {
  REQUIRE_ARG(model);
  REQUIRE_ARG(name);
  REQUIRE_ARG(probability);
  return guarded([&] {
    *probability = network::predict(model->model, name);
    return DGALAB_OK;
  });
}

dgalab_status dgalab_evaluate(const dgalab_model* model, const dgalab_split* split,
                              char** report_json, char** report_table) {
  REQUIRE_ARG(model);
  REQUIRE_ARG(split);
  return guarded([&] {
    auto report = metrics::compute_report(metrics::score_all(model->model, split->split.test));
    put_string(report_json, metrics::to_json(report).dump(1) + "\n");
    put_string(report_table, metrics::to_table(report));
    return DGALAB_OK;
  });
}

dgalab_status dgalab_attack(const dgalab_model* model, const dgalab_split* split,
                            dgalab_label target, const double* epsilons, size_t n_epsilons,
                            char** sweep_csv, char** sweep_table, char** crafted_csv) {
  REQUIRE_ARG(model);
  REQUIRE_ARG(split);
  REQUIRE_ARG(epsilons);
  if (n_epsilons == 0) return set_error(DGALAB_ERR_CONFIG, "no epsilon values given");
  if (target != DGALAB_BENIGN && target != DGALAB_MALICIOUS)
    return set_error(DGALAB_ERR_INVALID_ARGUMENT, "target must be benign or malicious");
  return guarded([&] {
    const auto label = static_cast<corpus::Label>(target);
    auto samples = corpus::select_label(split->split.test, label);
    if (samples.empty()) fail(ErrorKind::Config, "test partition has no samples of the target label");
    std::vector<double> eps(epsilons, epsilons + n_epsilons);
    auto charset = embedding::SnapCharset::domain_default();
    auto rows = adversary::epsilon_sweep(model->model, samples, eps, charset);
    put_string(sweep_csv, adversary::sweep_to_csv(rows));
    put_string(sweep_table, adversary::sweep_to_table(rows));
    if (crafted_csv) {
      std::string csv = "domain,family\n";
      for (double e : eps) {
        adversary::AttackConfig cfg;
        cfg.epsilon = e;
        cfg.charset = charset;
        auto batch = adversary::craft_batch(model->model, samples, cfg);
        if (!batch.errors.empty())
          fail(ErrorKind::Domain, "sample " + std::to_string(batch.errors.front().index) + ": " +
                                      batch.errors.front().message);
        csv += adversary::crafted_to_csv(batch.crafted);
      }
      *crafted_csv = dup_string(csv);
    }
    return DGALAB_OK;
  });
}

void dgalab_harden_plan_default(dgalab_harden_plan* plan) {
  if (!plan) return;
  trainer::AugmentationPlan p;
  *plan = {p.epsilon, p.replace_malicious ? 1 : 0, p.keep_benign ? 1 : 0};
}

dgalab_status dgalab_harden(const dgalab_split* split, const dgalab_train_config* cfg,
                            const dgalab_harden_plan* plan, dgalab_epoch_callback cb, void* user,
                            dgalab_model** baseline, dgalab_model** hardened,
                            char** report_json) {
  REQUIRE_ARG(split);
  REQUIRE_ARG(cfg);
  REQUIRE_ARG(plan);
  return guarded([&] {
    trainer::AugmentationPlan p{plan->epsilon, plan->replace_malicious != 0, plan->keep_benign != 0};
    auto r = trainer::harden(split->split, to_cpp(*cfg), p, to_cpp(cb, user));
    put_string(report_json, trainer::to_json(r.report).dump(1) + "\n");
    if (baseline) *baseline = new dgalab_model{std::move(r.baseline.model), std::move(r.baseline.adam)};
    if (hardened) *hardened = new dgalab_model{std::move(r.hardened.model), std::move(r.hardened.adam)};
    return DGALAB_OK;
  });
}

dgalab_status dgalab_blacklist(const dgalab_model* model, const dgalab_corpus* corpus,
                               double threshold, char** blacklist_csv, size_t* flagged) {
  REQUIRE_ARG(model);
  REQUIRE_ARG(corpus);
  REQUIRE_ARG(blacklist_csv);
  return guarded([&] {
    std::vector<vault::BlacklistEntry> entries;
    for (const auto& rec : corpus->records) {
      auto n = corpus::normalize(rec);
      const auto* sample = std::get_if<corpus::LabeledSample>(&n);
      if (!sample) continue;
      const double p = network::predict(model->model, sample->name);
      if (metrics::classify(p, threshold) == corpus::Label::Malicious)
        entries.push_back({rec.text, rec.family, p});
    }
    if (flagged) *flagged = entries.size();
    *blacklist_csv = dup_string(vault::blacklist_to_csv(entries));
    return DGALAB_OK;
  });
}

dgalab_status dgalab_vault_keygen(const char* private_pem_path, const char* public_pem_path) {
  REQUIRE_ARG(private_pem_path);
  REQUIRE_ARG(public_pem_path);
  return guarded([&] {
    auto key = vault::SigningKey::generate();
    write_file(private_pem_path, key.to_pem());
    write_file(public_pem_path, key.public_key().to_pem());
    return DGALAB_OK;
  });
}

dgalab_status dgalab_vault_pack(const char* blacklist_csv, const char* info_json,
                                const char* policy_json, const char* credentials_json,
                                const char* private_pem_path, unsigned kdf_log2_n,
                                const char* out_path) {
  REQUIRE_ARG(blacklist_csv);
  REQUIRE_ARG(info_json);
  REQUIRE_ARG(credentials_json);
  REQUIRE_ARG(private_pem_path);
  REQUIRE_ARG(out_path);
  return guarded([&] {
    // Reparse both inputs so malformed content is rejected before sealing.
    auto entries = vault::parse_blacklist_csv(blacklist_csv);
    auto info = nlohmann::json::parse(info_json);
    if (!info.is_object()) fail(ErrorKind::Format, "general info must be a JSON object");
    auto policy = policy_json ? vault::AccessPolicy::from_json(nlohmann::json::parse(policy_json))
                              : vault::AccessPolicy::standard();
    auto creds = nlohmann::json::parse(credentials_json).get<std::map<std::string, std::string>>();
    vault::KdfParams kdf;
    if (kdf_log2_n != 0) kdf.log2_n = static_cast<std::uint8_t>(kdf_log2_n);
    auto key = vault::SigningKey::load_pem(private_pem_path);
    auto bytes = vault::pack(entries, info, policy, creds, key, kdf);
    auto check = vault::verify(bytes, key.public_key());
    if (!check.ok()) fail(ErrorKind::Crypto, "freshly packed container does not verify: " + check.detail);
    write_file(out_path, bytes);
    return DGALAB_OK;
  });
}

dgalab_status dgalab_vault_verify(const char* container_path, const char* public_pem_path,
                                  char** detail) {
  REQUIRE_ARG(container_path);
  REQUIRE_ARG(public_pem_path);
  return guarded([&] {
    auto key = vault::PublicKey::load_pem(public_pem_path);
    auto bytes = read_file(container_path);
    auto r = vault::verify(bytes, key);
    put_string(detail, r.ok() ? "ok" : std::string(vault::to_string(r.status)) + ": " + r.detail);
    if (!r.ok()) return set_error(DGALAB_ERR_CRYPTO, r.detail);
    return DGALAB_OK;
  });
}

dgalab_status dgalab_vault_unseal(const char* container_path, const char* public_pem_path,
                                  const char* role, const char* passphrase,
                                  const char* attributes_json, const char* section,
                                  char** plaintext, dgalab_denial* denial) {
  REQUIRE_ARG(container_path);
  REQUIRE_ARG(public_pem_path);
  REQUIRE_ARG(role);
  REQUIRE_ARG(passphrase);
  REQUIRE_ARG(section);
  REQUIRE_ARG(plaintext);
  return guarded([&] {
    if (denial) *denial = DGALAB_DENIAL_NONE;
    auto sec = vault::parse_section_key(section);
    if (!sec) fail(ErrorKind::Config, std::string("unknown section '") + section + "'");
    auto container = vault::SealedContainer::open(read_file(container_path),
                                                  vault::PublicKey::load_pem(public_pem_path));
    auto r = container.unseal(role, passphrase, parse_attributes(attributes_json), *sec);
    if (!r.ok()) {
      if (denial) *denial = static_cast<dgalab_denial>(r.denial);
      return set_error(DGALAB_ERR_DENIED, std::string(vault::to_string(r.denial)));
    }
    *plaintext = dup_string(*r.plaintext);
    return DGALAB_OK;
  });
}

dgalab_status dgalab_server_new(const char* container_path, const char* public_pem_path,
                                const char* host, int port, dgalab_server** out,
                                int* bound_port) {
  REQUIRE_ARG(container_path);
  REQUIRE_ARG(public_pem_path);
  REQUIRE_ARG(host);
  REQUIRE_ARG(out);
  return guarded([&] {
    auto s = std::make_unique<dgalab_server>();
    s->container = std::make_shared<const vault::SealedContainer>(vault::SealedContainer::open(
        read_file(container_path), vault::PublicKey::load_pem(public_pem_path)));
    s->server = std::make_unique<vault::VaultServer>(s->container);
    const int p = s->server->bind(host, port);
    if (bound_port) *bound_port = p;
    *out = s.release();
    return DGALAB_OK;
  });
}

dgalab_status dgalab_server_run(dgalab_server* server) {
  REQUIRE_ARG(server);
  return guarded([&] {
    server->server->listen();
    return DGALAB_OK;
  });
}

void dgalab_server_stop(dgalab_server* server) {
  if (server) server->server->stop();
}

void dgalab_server_free(dgalab_server* server) { delete server; }

dgalab_status dgalab_sha256_file(const char* path, char** hex) {
  REQUIRE_ARG(path);
  REQUIRE_ARG(hex);
  return guarded([&] {
    *hex = dup_string(sha256_file_hex(path));
    return DGALAB_OK;
  });
}

}  // extern "C"
