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

#include "dgalab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgalab/common.hpp"

namespace dgalab::trainer {

using corpus::Label;

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::Config, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorKind::Config, "batch size must be >= 1");
  if (!(lr > 0.0)) fail(ErrorKind::Config, "learning rate must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorKind::Config, "dropout must lie in [0,1)");
  if (dim < 2) fail(ErrorKind::Config, "embedding dim must be >= 2");
  if (hidden < 1) fail(ErrorKind::Config, "hidden size must be >= 1");
}

nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs)
    epochs.push_back(
        {{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"train_accuracy", e.train_accuracy}});
  return {{"epochs", epochs}};
}

TrainResult train(const corpus::DatasetSplit& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const auto& data = split.train;
  if (data.empty()) fail(ErrorKind::Config, "training set is empty");
  const bool has_benign =
      std::any_of(data.begin(), data.end(), [](const auto& s) { return s.label == Label::Benign; });
  const bool has_malicious = std::any_of(data.begin(), data.end(), [](const auto& s) {
    return s.label == Label::Malicious;
  });
  if (!has_benign || !has_malicious)
    fail(ErrorKind::Config, "training set must contain both classes");

  TrainResult result{network::init_classifier(cfg.seed, {cfg.dim, cfg.hidden, cfg.dropout}),
                     {}, {}};
  auto& model = result.model;
  result.adam = network::AdamState::for_model(model);
  network::Parameters grads = model.params.zeros_like();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffler(mix64(cfg.seed, 0xe90c0000ULL + epoch));
    shuffler.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      grads.set_zero();
      for (std::size_t k = start; k < end; ++k) {
        const auto& sample = data[order[k]];
        auto seq = embedding::encode(sample.name, model.params.embedding);
        const std::uint64_t mask_seed = mix64(cfg.seed, epoch * order.size() + k);
        auto fwd = network::forward(model, seq, network::ForwardMode::training(mask_seed));
        loss_sum += network::bce_loss(fwd.p, sample.label);
        if (metrics::classify(fwd.p) == sample.label) ++correct;
        network::backward_accumulate(model, seq, fwd.trace, sample.label, scale, grads, nullptr);
      }
      network::adam_step(model, grads, result.adam, cfg.lr);
    }
    EpochStats stats{epoch + 1, loss_sum / static_cast<double>(data.size()),
                     static_cast<double>(correct) / static_cast<double>(data.size())};
    if (!std::isfinite(stats.mean_loss))
      fail(ErrorKind::Numeric, "non-finite training loss in epoch " + std::to_string(epoch + 1) +
                                   " (Adam step " + std::to_string(result.adam.step) + ")");
    result.log.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

corpus::DatasetSplit augment(const corpus::DatasetSplit& split,
                             const network::LstmClassifier& model, const AugmentationPlan& plan) {
  if (!(plan.epsilon >= 0.0)) fail(ErrorKind::Config, "augmentation epsilon must be >= 0");
  adversary::AttackConfig attack;
  attack.epsilon = plan.epsilon;

  corpus::DatasetSplit out;
  out.test = split.test;
  out.label_conflicts = split.label_conflicts;
  out.duplicates_dropped = split.duplicates_dropped;
  out.train.reserve(split.train.size());
  std::vector<corpus::LabeledSample> appended;
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    const auto& s = split.train[i];
    const bool craft = s.label == Label::Malicious || !plan.keep_benign;
    if (!craft) {
      out.train.push_back(s);
      continue;
    }
    adversary::AdversarialSample adv;
    try {
      adv = adversary::perturb_sample(model, s, attack);
    } catch (const Error& e) {
      throw Error(e.kind(), "augment: training sample " + std::to_string(i) + ": " + e.what());
    }
    auto crafted = adv.as_sample("+adv");
    if (s.label == Label::Malicious && !plan.replace_malicious) {
      out.train.push_back(s);
      appended.push_back(std::move(crafted));
    } else {
      out.train.push_back(std::move(crafted));
    }
  }
  out.train.insert(out.train.end(), appended.begin(), appended.end());
  return out;
}

ModelEvaluation evaluate(const std::string& name, const network::LstmClassifier& model,
                         const std::vector<corpus::LabeledSample>& clean_test,
                         const std::vector<corpus::LabeledSample>& adversarial_test) {
  ModelEvaluation ev;
  ev.model = name;
  ev.clean = metrics::compute_report(metrics::score_all(model, clean_test));
  ev.adversarial = metrics::compute_report(metrics::score_all(model, adversarial_test));
  ev.clean_detection = ev.clean.recall;
  ev.adv_detection = ev.adversarial.recall;
  return ev;
}

HardenResult harden(const corpus::DatasetSplit& split, const TrainConfig& cfg,
                    const AugmentationPlan& plan, const EpochCallback& on_epoch) {
  auto baseline = train(split, cfg, on_epoch);
  return harden_from_baseline(split, cfg, plan, std::move(baseline), on_epoch);
}

HardenResult harden_from_baseline(const corpus::DatasetSplit& split, const TrainConfig& cfg,
                                  const AugmentationPlan& plan, TrainResult baseline,
                                  const EpochCallback& on_epoch) {
  auto augmented = augment(split, baseline.model, plan);
  auto hardened = train(augmented, cfg, on_epoch);

  // Adversarial test set: malicious test samples crafted against the baseline,
  // keyed by their original family.
  adversary::AttackConfig attack;
  attack.epsilon = plan.epsilon;
  auto malicious_test = corpus::select_label(split.test, Label::Malicious);
  auto batch = adversary::craft_batch(baseline.model, malicious_test, attack);
  if (!batch.errors.empty())
    fail(ErrorKind::Domain, "harden: crafting test sample " +
                                std::to_string(batch.errors.front().index) + " failed: " +
                                batch.errors.front().message);
  std::vector<corpus::LabeledSample> adv_test;
  adv_test.reserve(batch.crafted.size());
  for (const auto& a : batch.crafted) adv_test.push_back(a.as_sample());

  HardenResult r;
  r.report.epsilon = plan.epsilon;
  r.report.seed = cfg.seed;
  r.report.adversarial_test_size = adv_test.size();
  r.report.baseline = evaluate("baseline", baseline.model, split.test, adv_test);
  r.report.hardened = evaluate("hardened", hardened.model, split.test, adv_test);
  r.baseline = std::move(baseline);
  r.hardened = std::move(hardened);
  return r;
}

namespace {

nlohmann::json model_json(const ModelEvaluation& ev, const HardenReport& report) {
  return {{"model", ev.model},
          {"clean_detection", ev.clean.per_family_detection},
          {"adv_detection", ev.adversarial.per_family_detection},
          {"clean_malicious_detection", ev.clean_detection},
          {"adv_malicious_detection", ev.adv_detection},
          {"clean_metrics", metrics::to_json(ev.clean)},
          {"epsilon", report.epsilon},
          {"seeds", {{"train", report.seed}}}};
}

}  // namespace

nlohmann::json to_json(const HardenReport& report) {
  return {{"epsilon", report.epsilon},
          {"adversarial_test_size", report.adversarial_test_size},
          {"models", {model_json(report.baseline, report), model_json(report.hardened, report)}}};
}

}  // namespace dgalab::trainer
