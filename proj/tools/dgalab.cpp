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

// dgalab command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dgalab/dgalab.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kNumeric = 4, kVault = 5 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(dgalab_status s) {
  switch (s) {
    case DGALAB_OK: return kOk;
    case DGALAB_ERR_INVALID_ARGUMENT:
    case DGALAB_ERR_CONFIG: return kUsage;
    case DGALAB_ERR_IO:
    case DGALAB_ERR_FORMAT:
    case DGALAB_ERR_DOMAIN:
    case DGALAB_ERR_CONTRACT: return kData;
    case DGALAB_ERR_NUMERIC: return kNumeric;
    case DGALAB_ERR_CRYPTO:
    case DGALAB_ERR_POLICY:
    case DGALAB_ERR_DENIED: return kVault;
    case DGALAB_ERR_INTERNAL: return kInternal;
  }
  return kInternal;
}

void check(dgalab_status s, const std::string& what) {
  if (s != DGALAB_OK) throw Failure{exit_code(s), what + ": " + dgalab_last_error()};
}

struct CString {
  char* p = nullptr;
  ~CString() { dgalab_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using Corpus = Handle<dgalab_corpus, dgalab_corpus_free>;
using Split = Handle<dgalab_split, dgalab_split_free>;
using Model = Handle<dgalab_model, dgalab_model_free>;
using Server = Handle<dgalab_server, dgalab_server_free>;

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure{kData, "cannot read " + p.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
    throw Failure{kData, "cannot write " + p.string()};
}

std::string digest(const fs::path& p) {
  CString hex;
  check(dgalab_sha256_file(p.c_str(), &hex.p), "digest");
  return hex.str();
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kData, "cannot create " + dir.string() + ": " + ec.message()};
}

// Manifest: config echo plus a digest of every artifact, no timestamps, so
// reruns with the same flags produce the same manifest.
void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& artifacts) {
  json digests = json::object();
  for (const auto& a : artifacts) digests[a] = digest(dir / a);
  json m = {{"tool", "dgalab"},
            {"version", dgalab_version()},
            {"command", command},
            {"config", config},
            {"artifacts", digests}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

struct DataOptions {
  std::string benign;
  std::size_t benign_limit = 0;
  std::string dga;
  std::size_t synthetic = 0;
  unsigned families = 5;
  std::size_t synthetic_benign = 0;
  double train_fraction = 0.9;
  std::uint64_t data_seed = 1;
  long long benign_cap = -1;

  void add_to(CLI::App* app) {
    app->add_option("--benign", benign, "benign list CSV (rank,domain)")->check(CLI::ExistingFile);
    app->add_option("--benign-limit", benign_limit, "read at most N benign rows (0 = all)");
    app->add_option("--dga", dga, "DGA archive CSV (domain,family)")->check(CLI::ExistingFile);
    app->add_option("--synthetic", synthetic, "synthetic random-DGA samples (total)");
    app->add_option("--families", families, "synthetic random-DGA families")
        ->check(CLI::Range(1u, 64u));
    app->add_option("--synthetic-benign", synthetic_benign,
                    "synthetic benign names (default: match the malicious count when --benign "
                    "is not given)");
    app->add_option("--train-fraction", train_fraction)->check(CLI::Range(0.0, 1.0));
    app->add_option("--data-seed", data_seed, "seed for corpus synthesis and the split");
    app->add_option("--benign-cap", benign_cap, "max benign samples (-1 = malicious count)");
  }

  json to_json() const {
    return {{"benign", benign},
            {"benign_limit", benign_limit},
            {"dga", dga},
            {"synthetic", synthetic},
            {"families", families},
            {"synthetic_benign", synthetic_benign},
            {"train_fraction", train_fraction},
            {"data_seed", data_seed},
            {"benign_cap", benign_cap}};
  }

  void require_malicious_source() const {
    if (dga.empty() && synthetic == 0)
      throw Failure{kUsage, "one of --dga or --synthetic is required"};
  }

  void build(Corpus& corpus, Split& split) const {
    require_malicious_source();
    check(dgalab_corpus_new(&corpus.p), "corpus");
    std::size_t skipped = 0;
    if (!dga.empty()) {
      check(dgalab_corpus_load_dga(corpus.p, dga.c_str(), &skipped), "loading " + dga);
      if (skipped) std::cerr << "skipped " << skipped << " malformed rows in " << dga << "\n";
    }
    if (synthetic > 0)
      check(dgalab_corpus_add_synthetic_dga(corpus.p, data_seed, families, synthetic),
            "synthesizing DGA names");
    std::size_t malicious = 0;
    check(dgalab_corpus_size(corpus.p, &malicious), "corpus");
    if (!benign.empty()) {
      check(dgalab_corpus_load_benign(corpus.p, benign.c_str(), benign_limit, &skipped),
            "loading " + benign);
      if (skipped) std::cerr << "skipped " << skipped << " malformed rows in " << benign << "\n";
    }
    std::size_t n_benign = synthetic_benign;
    if (n_benign == 0 && benign.empty()) n_benign = malicious;
    if (n_benign > 0)
      check(dgalab_corpus_add_synthetic_benign(corpus.p, data_seed, n_benign),
            "synthesizing benign names");
    check(dgalab_split_make(corpus.p, train_fraction, data_seed, benign_cap, &split.p), "split");
    std::size_t train = 0, test = 0, rejected = 0;
    dgalab_split_sizes(split.p, &train, &test, &rejected);
    std::cerr << "split: " << train << " train, " << test << " test, " << rejected
              << " rejected\n";
  }
};

struct TrainOptions {
  dgalab_train_config cfg{};
  TrainOptions() { dgalab_train_config_default(&cfg); }

  void add_to(CLI::App* app) {
    app->add_option("--epochs", cfg.epochs)->check(CLI::PositiveNumber);
    app->add_option("--batch", cfg.batch_size)->check(CLI::PositiveNumber);
    app->add_option("--lr", cfg.lr)->check(CLI::PositiveNumber);
    app->add_option("--dropout", cfg.dropout)->check(CLI::Range(0.0, 0.999));
    app->add_option("--seed", cfg.seed, "initialization, shuffling and dropout seed");
    app->add_option("--dim", cfg.dim, "embedding width")->check(CLI::Range(2, 4096));
    app->add_option("--hidden", cfg.hidden, "LSTM units per layer")->check(CLI::Range(1, 4096));
  }

  json to_json() const {
    return {{"epochs", cfg.epochs}, {"batch", cfg.batch_size}, {"lr", cfg.lr},
            {"dropout", cfg.dropout}, {"seed", cfg.seed}, {"dim", cfg.dim},
            {"hidden", cfg.hidden}};
  }
};

void print_epoch(size_t epoch, double loss, double acc, void*) {
  std::fprintf(stderr, "epoch %zu  loss %.6f  train_acc %.4f\n", epoch, loss, acc);
}

std::vector<double> parse_epsilons(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(v >= 0.0))
      throw Failure{kUsage, "bad epsilon '" + item + "'"};
    out.push_back(v);
  }
  if (out.empty()) throw Failure{kUsage, "--epsilons is empty"};
  return out;
}

std::map<std::string, std::string> parse_attrs(const std::vector<std::string>& kv) {
  std::map<std::string, std::string> out;
  for (const auto& s : kv) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{kUsage, "--attr expects key=value"};
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

std::string passphrase_from(const std::string& literal, const std::string& env) {
  if (!env.empty()) {
    const char* v = std::getenv(env.c_str());
    if (!v) throw Failure{kUsage, "environment variable " + env + " is not set"};
    return v;
  }
  if (literal.empty()) throw Failure{kUsage, "--passphrase or --passphrase-env is required"};
  return literal;
}

// ---- commands ---------------------------------------------------------

int cmd_train(const DataOptions& data, const TrainOptions& tr, const fs::path& out) {
  Corpus corpus;
  Split split;
  data.build(corpus, split);
  prepare_out_dir(out);
  Model model;
  CString log;
  check(dgalab_train(split.p, &tr.cfg, print_epoch, nullptr, &model.p, &log.p), "training");
  check(dgalab_model_save(model.p, (out / "model.ckpt").c_str()), "saving checkpoint");
  write_text(out / "train_log.json", log.str());
  CString report, table;
  check(dgalab_evaluate(model.p, split.p, &report.p, &table.p), "evaluation");
  write_text(out / "metrics.json", report.str());
  std::cout << table.str();
  write_manifest(out, "train", {{"data", data.to_json()}, {"train", tr.to_json()}},
                 {"model.ckpt", "train_log.json", "metrics.json"});
  return kOk;
}

int cmd_evaluate(const DataOptions& data, const std::string& model_path, const fs::path& out) {
  Corpus corpus;
  Split split;
  data.build(corpus, split);
  Model model;
  check(dgalab_model_load(model_path.c_str(), &model.p), "loading " + model_path);
  prepare_out_dir(out);
  CString report, table;
  check(dgalab_evaluate(model.p, split.p, &report.p, &table.p), "evaluation");
  write_text(out / "metrics.json", report.str());
  std::cout << table.str();
  write_manifest(out, "evaluate",
                 {{"data", data.to_json()}, {"model", model_path}, {"model_sha256", digest(model_path)}},
                 {"metrics.json"});
  return kOk;
}

int cmd_attack(const DataOptions& data, const std::string& model_path,
               const std::string& epsilons, const std::string& target, const fs::path& out) {
  auto eps = parse_epsilons(epsilons);
  Corpus corpus;
  Split split;
  data.build(corpus, split);
  Model model;
  check(dgalab_model_load(model_path.c_str(), &model.p), "loading " + model_path);
  prepare_out_dir(out);
  CString csv, table, crafted;
  const auto label = target == "benign" ? DGALAB_BENIGN : DGALAB_MALICIOUS;
  check(dgalab_attack(model.p, split.p, label, eps.data(), eps.size(), &csv.p, &table.p,
                      &crafted.p),
        "attack");
  write_text(out / "sweep.csv", csv.str());
  write_text(out / "adversarial.csv", crafted.str());
  std::cout << table.str();
  write_manifest(out, "attack",
                 {{"data", data.to_json()},
                  {"model", model_path},
                  {"model_sha256", digest(model_path)},
                  {"epsilons", eps},
                  {"target", target}},
                 {"sweep.csv", "adversarial.csv"});
  return kOk;
}

int cmd_harden(const DataOptions& data, const TrainOptions& tr, const dgalab_harden_plan& plan,
               const fs::path& out) {
  Corpus corpus;
  Split split;
  data.build(corpus, split);
  prepare_out_dir(out);
  Model baseline, hardened;
  CString report;
  check(dgalab_harden(split.p, &tr.cfg, &plan, print_epoch, nullptr, &baseline.p, &hardened.p,
                      &report.p),
        "hardening");
  check(dgalab_model_save(baseline.p, (out / "baseline.ckpt").c_str()), "saving baseline");
  check(dgalab_model_save(hardened.p, (out / "hardened.ckpt").c_str()), "saving hardened");
  write_text(out / "harden_report.json", report.str());
  auto r = json::parse(report.str());
  for (const auto& m : r.at("models"))
    std::printf("%-9s clean_detection %.4f  adv_detection %.4f\n",
                m.at("model").get<std::string>().c_str(),
                m.at("clean_malicious_detection").get<double>(),
                m.at("adv_malicious_detection").get<double>());
  write_manifest(out, "harden",
                 {{"data", data.to_json()},
                  {"train", tr.to_json()},
                  {"augmentation",
                   {{"epsilon", plan.epsilon},
                    {"replace_malicious", plan.replace_malicious != 0},
                    {"keep_benign", plan.keep_benign != 0}}}},
                 {"baseline.ckpt", "hardened.ckpt", "harden_report.json"});
  return kOk;
}

struct BlacklistOptions {
  std::string model;
  std::string input;
  double threshold = 0.5;
  std::string key;
  std::string credentials;
  std::string info;
  unsigned kdf_log2_n = 0;
};

int cmd_blacklist(const BlacklistOptions& o, const fs::path& out) {
  Model model;
  check(dgalab_model_load(o.model.c_str(), &model.p), "loading " + o.model);
  Corpus corpus;
  check(dgalab_corpus_new(&corpus.p), "corpus");
  std::size_t skipped = 0;
  check(dgalab_corpus_load_dga(corpus.p, o.input.c_str(), &skipped), "loading " + o.input);
  CString csv;
  std::size_t flagged = 0;
  check(dgalab_blacklist(model.p, corpus.p, o.threshold, &csv.p, &flagged), "scoring");
  std::size_t total = 0;
  dgalab_corpus_size(corpus.p, &total);

  json info = o.info.empty() ? json::object() : json::parse(read_text(o.info));
  if (!info.is_object()) throw Failure{kData, "--info must hold a JSON object"};
  info["classifier"] = {{"type", "char-lstm"},
                        {"checkpoint_sha256", digest(o.model)},
                        {"threshold", o.threshold},
                        {"scored", total},
                        {"flagged", flagged}};
  const std::string creds = read_text(o.credentials);

  prepare_out_dir(out);
  write_text(out / "blacklist.csv", csv.str());
  write_text(out / "general_info.json", info.dump(2) + "\n");
  const auto container = out / "blacklist.pspd";
  check(dgalab_vault_pack(csv.p, info.dump().c_str(), nullptr, creds.c_str(), o.key.c_str(),
                          o.kdf_log2_n, container.c_str()),
        "packing");
  std::cout << flagged << " of " << total << " domains flagged\n";
  // The container embeds fresh random keys, so its digest differs per run.
  write_manifest(out, "blacklist",
                 {{"model", o.model},
                  {"model_sha256", digest(o.model)},
                  {"input", o.input},
                  {"input_sha256", digest(o.input)},
                  {"threshold", o.threshold},
                  {"key", o.key},
                  {"credentials", o.credentials},
                  {"info", o.info},
                  {"kdf_log2_n", o.kdf_log2_n}},
                 {"blacklist.csv", "general_info.json", "blacklist.pspd"});
  return kOk;
}

int cmd_serve(const std::string& container, const std::string& pubkey, const std::string& bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Failure{kUsage, "--bind expects host:port"};
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw Failure{kUsage, "bad port in --bind"};
  }

  // Handle SIGINT/SIGTERM synchronously on a dedicated thread; the mask is
  // inherited by the server's worker threads.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Server server;
  int bound = 0;
  check(dgalab_server_new(container.c_str(), pubkey.c_str(), host.c_str(), port, &server.p, &bound),
        "starting server");
  std::cerr << "serving " << container << " on " << host << ":" << bound
            << " (plain HTTP; terminate TLS in front)\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    dgalab_server_stop(server.p);
  });
  auto s = dgalab_server_run(server.p);
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  check(s, "server");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character-level LSTM DGA detection lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dgalab_version()));

  DataOptions data;
  TrainOptions tr;
  std::string out, model_path;

  auto* train = app.add_subcommand("train", "train a classifier");
  data.add_to(train);
  tr.add_to(train);
  train->add_option("--out", out, "output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score the test partition");
  data.add_to(evaluate);
  evaluate->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out)->required();

  std::string epsilons = "0,0.5,1,2,5,11", target = "malicious";
  auto* attack = app.add_subcommand("attack", "epsilon sweep and adversarial corpus");
  data.add_to(attack);
  attack->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  attack->add_option("--epsilons", epsilons, "comma-separated epsilon values")
      ->capture_default_str();
  attack->add_option("--target", target)->check(CLI::IsMember({"malicious", "benign"}))
      ->capture_default_str();
  attack->add_option("--out", out)->required();

  dgalab_harden_plan plan{};
  dgalab_harden_plan_default(&plan);
  plan.epsilon = 0.5;
  bool append = false, perturb_benign = false;
  auto* harden = app.add_subcommand("harden", "adversarial augmentation and retraining");
  data.add_to(harden);
  tr.add_to(harden);
  harden->add_option("--epsilon", plan.epsilon)->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  harden->add_flag("--append", append, "append crafted samples instead of replacing");
  harden->add_flag("--perturb-benign", perturb_benign, "also perturb benign training samples");
  harden->add_option("--out", out)->required();

  BlacklistOptions bl;
  auto* blacklist = app.add_subcommand("blacklist", "score a corpus and seal the flagged domains");
  blacklist->add_option("--model", bl.model)->required()->check(CLI::ExistingFile);
  blacklist->add_option("--input", bl.input, "CSV of domain,family rows")->required()
      ->check(CLI::ExistingFile);
  blacklist->add_option("--threshold", bl.threshold)->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  blacklist->add_option("--key", bl.key, "publisher private key (PEM)")->required()
      ->check(CLI::ExistingFile);
  blacklist->add_option("--credentials", bl.credentials, "JSON {role: passphrase}")->required()
      ->check(CLI::ExistingFile);
  blacklist->add_option("--info", bl.info, "extra general-info JSON object")
      ->check(CLI::ExistingFile);
  blacklist->add_option("--kdf-log2n", bl.kdf_log2_n, "scrypt cost (default 14)")
      ->check(CLI::Range(1u, 24u));
  blacklist->add_option("--out", out)->required();

  auto* vault = app.add_subcommand("vault", "sealed container operations");
  vault->require_subcommand(1);

  auto* keygen = vault->add_subcommand("keygen", "generate an Ed25519 publisher key pair");
  keygen->add_option("--out", out)->required();

  std::string blacklist_csv, info_json, policy_json, creds_json, key_path, container_path,
      pubkey_path, role, section, passphrase, passphrase_env, bind = "127.0.0.1:8443";
  unsigned kdf_log2_n = 0;
  std::vector<std::string> attrs;
  auto* pack = vault->add_subcommand("pack", "seal a blacklist and general info");
  pack->add_option("--blacklist", blacklist_csv)->required()->check(CLI::ExistingFile);
  pack->add_option("--info", info_json)->required()->check(CLI::ExistingFile);
  pack->add_option("--policy", policy_json, "access policy JSON (default: standard table)")
      ->check(CLI::ExistingFile);
  pack->add_option("--credentials", creds_json, "JSON {role: passphrase}")->required()
      ->check(CLI::ExistingFile);
  pack->add_option("--key", key_path)->required()->check(CLI::ExistingFile);
  pack->add_option("--kdf-log2n", kdf_log2_n)->check(CLI::Range(1u, 24u));
  pack->add_option("--out", out, "container file")->required();

  auto* verify = vault->add_subcommand("verify", "check structure and signature");
  verify->add_option("--container", container_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--pubkey", pubkey_path)->required()->check(CLI::ExistingFile);

  auto* unseal = vault->add_subcommand("unseal", "decrypt one section");
  unseal->add_option("--container", container_path)->required()->check(CLI::ExistingFile);
  unseal->add_option("--pubkey", pubkey_path)->required()->check(CLI::ExistingFile);
  unseal->add_option("--role", role)->required();
  unseal->add_option("--section", section)->required()
      ->check(CLI::IsMember({"domain_blacklist", "general_info", "metadata"}));
  unseal->add_option("--passphrase", passphrase);
  unseal->add_option("--passphrase-env", passphrase_env, "read the passphrase from this variable");
  unseal->add_option("--attr", attrs, "attribute key=value (repeatable)");
  unseal->add_option("--out", out, "write plaintext here instead of stdout");

  auto* serve = vault->add_subcommand("serve", "HTTP access service");
  serve->add_option("--container", container_path)->required()->check(CLI::ExistingFile);
  serve->add_option("--pubkey", pubkey_path)->required()->check(CLI::ExistingFile);
  serve->add_option("--bind", bind, "host:port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(data, tr, out);
    if (*evaluate) return cmd_evaluate(data, model_path, out);
    if (*attack) return cmd_attack(data, model_path, epsilons, target, out);
    if (*harden) {
      plan.replace_malicious = append ? 0 : 1;
      plan.keep_benign = perturb_benign ? 0 : 1;
      return cmd_harden(data, tr, plan, out);
    }
    if (*blacklist) return cmd_blacklist(bl, out);
    if (*keygen) {
      prepare_out_dir(out);
      check(dgalab_vault_keygen((fs::path(out) / "publisher.pem").c_str(),
                                (fs::path(out) / "publisher.pub.pem").c_str()),
            "keygen");
      write_manifest(out, "vault keygen", json::object(), {"publisher.pub.pem"});
      return kOk;
    }
    if (*pack) {
      const std::string policy = policy_json.empty() ? std::string() : read_text(policy_json);
      check(dgalab_vault_pack(read_text(blacklist_csv).c_str(), read_text(info_json).c_str(),
                              policy_json.empty() ? nullptr : policy.c_str(),
                              read_text(creds_json).c_str(), key_path.c_str(), kdf_log2_n,
                              out.c_str()),
            "packing");
      std::cout << "sealed " << out << " sha256 " << digest(out) << "\n";
      return kOk;
    }
    if (*verify) {
      CString detail;
      auto s = dgalab_vault_verify(container_path.c_str(), pubkey_path.c_str(), &detail.p);
      if (s != DGALAB_OK && !detail.p) check(s, "verify");
      std::cout << detail.str() << "\n";
      return exit_code(s);
    }
    if (*unseal) {
      const auto pass = passphrase_from(passphrase, passphrase_env);
      const std::string attr_json = json(parse_attrs(attrs)).dump();
      CString plain;
      dgalab_denial denial = DGALAB_DENIAL_NONE;
      auto s = dgalab_vault_unseal(container_path.c_str(), pubkey_path.c_str(), role.c_str(),
                                   pass.c_str(), attr_json.c_str(), section.c_str(), &plain.p,
                                   &denial);
      if (s == DGALAB_ERR_DENIED) {
        std::cerr << "access denied: " << dgalab_last_error() << "\n";
        return kVault;
      }
      check(s, "unseal");
      if (out.empty())
        std::cout << plain.str();
      else
        write_text(out, plain.str());
      return kOk;
    }
    if (*serve) return cmd_serve(container_path, pubkey_path, bind);
  } catch (const Failure& f) {
    std::cerr << "dgalab: " << f.message << "\n";
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "dgalab: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
