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

// Acceptance run: one PASS/FAIL line per criterion. Criteria 2-5 share the
// desk-scale model, so they run in order. Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "dgalab/adversary.hpp"
#include "dgalab/metrics.hpp"
#include "dgalab/trainer.hpp"
#include "dgalab/vault.hpp"
#include "dgalab/vault_server.hpp"
#include "support.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with Eigen internals.
#include <httplib.h>

using namespace dgalab;
using corpus::Label;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kGradBudgetSec = 30;
constexpr double kFamilyMin = 0.90;
constexpr double kAccuracyMin = 0.92;
constexpr double kTrainBudgetSec = 20 * 60;
constexpr double kDirectionMin = 0.90;
constexpr double kAttackDrop = 0.30;
constexpr double kHardenGain = 0.20;
constexpr double kCleanSlack = 0.05;
constexpr double kHardenBudgetSec = 45 * 60;
constexpr std::uint64_t kSeed = 7;

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(kSeed);
  double worst = 0;
  std::size_t failed = 0, checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int hidden = rng.below(2) ? 4 : 2;
    const int dim = rng.below(2) ? 6 : 3;
    auto model = network::init_classifier(1000 + trial, {dim, hidden, 0.5});
    const auto name = testing::random_name(rng, 1, 6);
    const auto y = static_cast<Label>(rng.below(2));
    auto r = testing::finite_difference_check(model, name, y, kGradStep, kGradTol);
    worst = std::max(worst, r.max_rel_error);
    failed += r.failures;
    checked += r.checked;
  }
  const double sec = seconds_since(t0);
  report(1, failed == 0 && sec < kGradBudgetSec,
         std::to_string(checked) + " gradients, max rel error " + std::to_string(worst) + " (< " +
             std::to_string(kGradTol) + "), " + fmt(sec, 1) + " s");
}

struct Desk {
  corpus::DatasetSplit split;
  trainer::TrainConfig cfg;
  std::optional<trainer::TrainResult> trained;
};

void criterion_clean(Desk& d) {
  d.split = corpus::make_split(testing::desk_corpus(kSeed, 5000, 1000), {0.9, kSeed, std::nullopt});
  d.cfg.seed = kSeed;  // other fields keep the published hyperparameters
  const auto t0 = std::chrono::steady_clock::now();
  d.trained = trainer::train(d.split, d.cfg);
  const double sec = seconds_since(t0);
  auto scored = metrics::score_all(d.trained->model, d.split.test);
  auto rep = metrics::compute_report(scored);
  auto fam = metrics::per_family_detection(scored);
  double worst = 1.0;
  std::string detail;
  for (const auto& [name, rate] : fam)
    if (name != "benign") {
      worst = std::min(worst, rate);
      detail += name + "=" + fmt(rate, 3) + " ";
    }
  report(2, worst >= kFamilyMin && rep.accuracy >= kAccuracyMin && sec < kTrainBudgetSec,
         "accuracy " + fmt(rep.accuracy) + ", families " + detail + "(" + fmt(sec, 0) + " s)");
}

void criterion_direction(const Desk& d) {
  const auto& model = d.trained->model;
  auto mal = corpus::select_label(d.split.test, Label::Malicious);
  const std::size_t n = std::min<std::size_t>(200, mal.size());
  std::size_t increased = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto seq = embedding::encode(mal[i].name, model.params.embedding);
    const double before =
        network::bce_loss(network::forward(model, seq, network::ForwardMode::eval()).p, Label::Malicious);
    auto z = adversary::perturb_embeddings(model, seq, Label::Malicious, 0.01);
    const double after =
        network::bce_loss(network::forward(model, z, network::ForwardMode::eval()).p, Label::Malicious);
    increased += after > before;
  }
  const double frac = n ? static_cast<double>(increased) / n : 0.0;
  report(3, n == 200 && frac >= kDirectionMin,
         std::to_string(increased) + "/" + std::to_string(n) + " losses increased at eps=0.01");
}

std::optional<double> criterion_attack(const Desk& d) {
  const auto& model = d.trained->model;
  auto mal = corpus::select_label(d.split.test, Label::Malicious);
  const auto clean = metrics::compute_report(metrics::score_all(model, d.split.test));
  auto rows = adversary::epsilon_sweep(model, mal, {0, 0.5, 1, 2, 5, 11},
                                       embedding::SnapCharset::domain_default());
  std::optional<double> chosen;
  std::string detail;
  for (const auto& r : rows) {
    detail += fmt(r.epsilon, 1) + ":" + fmt(r.detection_rate, 3) + " ";
    if (!chosen && r.epsilon > 0 && clean.recall - r.detection_rate >= kAttackDrop) chosen = r.epsilon;
  }
  const bool identity = rows.front().epsilon == 0 && rows.front().detection_rate == clean.recall;
  report(4, chosen.has_value() && identity,
         "clean " + fmt(clean.recall, 3) + ", sweep " + detail +
             (chosen ? "-> eps " + fmt(*chosen, 1) : "-> no eps drops 30 points") +
             (identity ? ", eps=0 matches clean" : ", eps=0 differs from clean"));
  return chosen;
}

void criterion_harden(Desk& d, std::optional<double> eps) {
  if (!eps) {
    report(5, false, "no epsilon qualified in criterion 4");
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  trainer::AugmentationPlan plan;  // default plan: replace malicious, keep benign
  plan.epsilon = *eps;
  auto h = trainer::harden_from_baseline(d.split, d.cfg, plan, std::move(*d.trained));
  d.trained.reset();
  const double sec = seconds_since(t0);
  const auto& b = h.report.baseline;
  const auto& k = h.report.hardened;
  const double gain = k.adv_detection - b.adv_detection;
  const double clean_gap = std::abs(k.clean_detection - b.clean_detection);
  report(5, gain >= kHardenGain && clean_gap <= kCleanSlack && sec < kHardenBudgetSec,
         "eps " + fmt(*eps, 1) + ": adversarial detection " + fmt(b.adv_detection, 3) + " -> " +
             fmt(k.adv_detection, 3) + " (gain " + fmt(gain, 3) + ", need " + fmt(kHardenGain, 2) +
             "); clean detection " + fmt(b.clean_detection, 3) + " -> " + fmt(k.clean_detection, 3) +
             " (gap " + fmt(clean_gap, 3) + ", max " + fmt(kCleanSlack, 2) + "); " + fmt(sec, 0) +
             " s");
}

void criterion_metrics() {
  auto pred = [](Label truth, double score) {
    metrics::ScoredPrediction p;
    p.sample = {"x", truth, truth == Label::Benign ? "benign" : "dga"};
    p.score = score;
    p.predicted = metrics::classify(score);
    return p;
  };
  std::vector<metrics::ScoredPrediction> v;
  for (int i = 0; i < 9; ++i) v.push_back(pred(Label::Malicious, 0.9));
  v.push_back(pred(Label::Benign, 0.8));
  for (int i = 0; i < 9; ++i) v.push_back(pred(Label::Benign, 0.1));
  v.push_back(pred(Label::Malicious, 0.2));
  auto r = metrics::compute_report(v);
  const bool fixture = r.tp == 9 && r.fp == 1 && r.tn == 9 && r.fn == 1 &&
                       std::abs(r.accuracy - 0.9) < 1e-12 && std::abs(r.precision - 0.9) < 1e-12 &&
                       std::abs(r.recall - 0.9) < 1e-12 && std::abs(r.f1 - 0.9) < 1e-12 &&
                       std::abs(r.fpr - 0.1) < 1e-12 && std::abs(r.fnr - 0.1) < 1e-12;

  std::vector<metrics::ScoredPrediction> sep, constant;
  for (int i = 0; i < 5; ++i) {
    sep.push_back(pred(Label::Malicious, 0.6 + 0.01 * i));
    sep.push_back(pred(Label::Benign, 0.1 + 0.01 * i));
    constant.push_back(pred(Label::Malicious, 0.4));
    constant.push_back(pred(Label::Benign, 0.4));
  }
  const bool anchors = *metrics::auc_mann_whitney(sep) == 1.0 &&
                       *metrics::auc_mann_whitney(constant) == 0.5;

  Rng rng(kSeed);
  int invariant_failures = 0;
  for (int f = 0; f < 1000; ++f) {
    std::vector<metrics::ScoredPrediction> s;
    const std::size_t n = 2 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) {
      const auto truth = i < 2 ? static_cast<Label>(i) : static_cast<Label>(rng.below(2));
      s.push_back(pred(truth, static_cast<double>(rng.below(20)) / 19.0));
    }
    const double a = *metrics::auc_mann_whitney(s);
    for (auto& p : s) p.score = std::atan(5 * p.score - 2) * 3 + 1;
    if (std::abs(*metrics::auc_mann_whitney(s) - a) > 1e-12) ++invariant_failures;
  }
  report(6, fixture && anchors && invariant_failures == 0,
         std::string("9/1/9/1 fixture ") + (fixture ? "exact" : "mismatch") + ", AUC anchors " +
             (anchors ? "ok" : "wrong") + ", monotone invariance failures " +
             std::to_string(invariant_failures) + "/1000");
}

void criterion_vault() {
  using namespace vault;
  auto key = SigningKey::generate();
  auto pub = key.public_key();
  SectionPlaintexts plain{"domain,family,score\nqx7kz2.com,synth_rand_0,0.99\nwp3n.net,synth_rand_1,0.87\n",
                          "{\"classifier\":\"char-lstm\",\"threshold\":0.5}"};
  const std::map<std::string, std::string> creds = {{"Administrator", "correct horse"},
                                                    {"User", "battery staple"}};
  auto bytes = pack(plain, AccessPolicy::standard(), creds, key);
  const bool verified = verify(bytes, pub).ok();
  auto c = SealedContainer::open(bytes, pub);

  auto bl = c.unseal("Administrator", "correct horse", {}, SectionName::DomainBlacklist);
  auto gi = c.unseal("Administrator", "correct horse", {}, SectionName::GeneralInfo);
  auto md = c.unseal("Administrator", "correct horse", {}, SectionName::Metadata);
  const bool round_trip = bl.ok() && gi.ok() && md.ok() && *bl.plaintext == plain.domain_blacklist &&
                          *gi.plaintext == plain.general_info &&
                          *md.plaintext == AccessPolicy::standard().to_json().dump(2) + "\n";
  const bool user_ok =
      c.unseal("User", "battery staple", {}, SectionName::DomainBlacklist).ok() &&
      c.unseal("User", "battery staple", {}, SectionName::GeneralInfo).denial == Denial::PolicyDenial &&
      c.unseal("User", "battery staple", {}, SectionName::Metadata).denial == Denial::PolicyDenial;

  Rng rng(kSeed);
  int survived = 0;
  for (int i = 0; i < 1000; ++i) {
    auto copy = bytes;
    copy[rng.below(copy.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    survived += verify(copy, pub).ok();
  }

  auto shared = std::make_shared<const SealedContainer>(c);
  VaultServer server(shared);
  const int port = server.bind("127.0.0.1", 0);
  std::thread loop([&] { server.listen(); });
  httplib::Client probe("127.0.0.1", port);
  for (int i = 0; i < 200 && !probe.Get("/health"); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));

  const std::vector<std::string> bodies = {
      R"({"role":"Administrator","passphrase":"correct horse","section":"all"})",
      R"({"role":"User","passphrase":"battery staple","section":"all"})",
      R"({"role":"User","passphrase":"battery staple","section":"general_info"})",
      R"({"role":"User","passphrase":"wrong","section":"blacklist"})",
      R"({"role":"Administrator","passphrase":"correct horse","section":"metadata"})"};
  std::vector<std::pair<int, std::string>> sequential;
  for (const auto& b : bodies) {
    auto r = probe.Post("/access", b, "application/json");
    sequential.emplace_back(r ? r->status : -1, r ? r->body : "");
  }
  std::vector<std::pair<int, std::string>> concurrent(100);
  std::vector<std::thread> clients;
  for (int i = 0; i < 100; ++i)
    clients.emplace_back([&, i] {
      httplib::Client cli("127.0.0.1", port);
      cli.set_read_timeout(60, 0);
      auto r = cli.Post("/access", bodies[i % bodies.size()], "application/json");
      concurrent[i] = {r ? r->status : -1, r ? r->body : ""};
    });
  for (auto& t : clients) t.join();
  server.stop();
  loop.join();
  int mismatched = 0;
  for (int i = 0; i < 100; ++i) mismatched += concurrent[i] != sequential[i % bodies.size()];
  const bool statuses = sequential[0].first == 200 && sequential[1].first == 200 &&
                        sequential[2].first == 403 && sequential[3].first == 401;

  report(7, verified && round_trip && user_ok && survived == 0 && mismatched == 0 && statuses,
         std::string("round trip ") + (round_trip ? "exact" : "mismatch") + ", User denial " +
             (user_ok ? "ok" : "wrong") + ", flips accepted " + std::to_string(survived) +
             "/1000, concurrent mismatches " + std::to_string(mismatched) + "/100");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool run_cli(const std::string& args) {
  const std::string cmd = std::string(DGALAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

void criterion_determinism() {
  const auto root = fs::temp_directory_path() / ("dgalab_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string common =
      " --synthetic 400 --families 4 --data-seed 11 --epochs 2 --batch 32 --lr 0.005"
      " --dim 16 --hidden 8 --seed 5";
  bool ran = true;
  for (const char* run : {"a", "b"}) {
    ran &= run_cli("train" + common + " --out " + (root / run / "train").string());
    ran &= run_cli("harden" + common + " --epsilon 2 --out " + (root / run / "harden").string());
  }
  int differing = 0;
  std::string which;
  for (const char* f : {"train/model.ckpt", "train/train_log.json", "train/metrics.json",
                        "train/manifest.json", "harden/baseline.ckpt", "harden/hardened.ckpt",
                        "harden/harden_report.json", "harden/manifest.json"}) {
    const auto a = slurp(root / "a" / f);
    if (a.empty() || a != slurp(root / "b" / f)) {
      ++differing;
      which += std::string(" ") + f;
    }
  }
  fs::remove_all(root);
  report(8, ran && differing == 0,
         std::string("CLI runs ") + (ran ? "ok" : "failed") + ", differing artifacts " +
             std::to_string(differing) + "/8" + which);
}

}  // namespace

int main() {
  try {
    criterion_gradients();
    Desk desk;
    criterion_clean(desk);
    criterion_direction(desk);
    const auto eps = criterion_attack(desk);
    criterion_harden(desk, eps);
    criterion_metrics();
    criterion_vault();
    criterion_determinism();
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
