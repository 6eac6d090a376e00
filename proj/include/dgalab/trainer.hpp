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

#ifndef DGALAB_TRAINER_HPP
#define DGALAB_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgalab/adversary.hpp"
#include "dgalab/corpus.hpp"
#include "dgalab/metrics.hpp"
#include "dgalab/network.hpp"

namespace dgalab::trainer {

struct TrainConfig {
  std::size_t epochs = 6;
  std::size_t batch_size = 128;
  double lr = 0.001;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  int dim = 256;
  int hidden = 128;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

nlohmann::json to_json(const TrainLog& log);

using EpochCallback = std::function<void(const EpochStats&)>;

struct TrainResult {
  network::LstmClassifier model;
  network::AdamState adam;
  TrainLog log;
};

/// Seeded per-epoch shuffle, mini-batches of mean BCE gradients, one Adam
/// step per batch. Deterministic for a fixed seed.
TrainResult train(const corpus::DatasetSplit& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

struct AugmentationPlan {
  double epsilon = 0.0;
  /// Replace malicious training samples by their crafted counterparts;
  /// when false the crafted samples are appended instead.
  bool replace_malicious = true;
  /// Keep benign training samples unchanged; when false they are replaced
  /// by crafted benign counterparts (label stays Benign).
  bool keep_benign = true;
};

/// Crafts adversarial training samples against `model`. Labels never change
/// and the test partition is copied untouched. Crafted families get "+adv".
corpus::DatasetSplit augment(const corpus::DatasetSplit& split,
                             const network::LstmClassifier& model, const AugmentationPlan& plan);

struct ModelEvaluation {
  std::string model;  // "baseline" | "hardened"
  metrics::MetricsReport clean;        // full clean test partition
  metrics::MetricsReport adversarial;  // crafted malicious test samples
  double clean_detection = 0.0;        // malicious recall on clean test
  double adv_detection = 0.0;          // malicious recall on crafted test
};

struct HardenReport {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t adversarial_test_size = 0;
  ModelEvaluation baseline;
  ModelEvaluation hardened;
};

nlohmann::json to_json(const HardenReport& report);

struct HardenResult {
  TrainResult baseline;
  TrainResult hardened;
  HardenReport report;
};

/// Trains a baseline, crafts the augmentation with it, retrains from a fresh
/// initialization on the augmented split, and evaluates both models on the
/// clean test set and on a test set crafted against the baseline.
HardenResult harden(const corpus::DatasetSplit& split, const TrainConfig& cfg,
                    const AugmentationPlan& plan, const EpochCallback& on_epoch = {});

/// Same as harden() with an already trained baseline.
HardenResult harden_from_baseline(const corpus::DatasetSplit& split, const TrainConfig& cfg,
                                  const AugmentationPlan& plan, TrainResult baseline,
                                  const EpochCallback& on_epoch = {});

ModelEvaluation evaluate(const std::string& name, const network::LstmClassifier& model,
                         const std::vector<corpus::LabeledSample>& clean_test,
                         const std::vector<corpus::LabeledSample>& adversarial_test);

}  // namespace dgalab::trainer

#endif  // DGALAB_TRAINER_HPP
