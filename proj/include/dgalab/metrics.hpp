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

#ifndef DGALAB_METRICS_HPP
#define DGALAB_METRICS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgalab/corpus.hpp"
#include "dgalab/network.hpp"

namespace dgalab::metrics {

inline constexpr double kDefaultThreshold = 0.5;

struct ScoredPrediction {
  corpus::LabeledSample sample;
  double score = 0.0;
  corpus::Label predicted = corpus::Label::Benign;
};

/// Malicious is the positive class; score == threshold counts as Malicious.
inline corpus::Label classify(double score, double threshold = kDefaultThreshold) {
  return score >= threshold ? corpus::Label::Malicious : corpus::Label::Benign;
}

std::vector<ScoredPrediction> score_all(const network::LstmClassifier& model,
                                        const std::vector<corpus::LabeledSample>& samples,
                                        double threshold = kDefaultThreshold);

struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  std::optional<double> auc;
  std::string auc_note;  // reason when auc is undefined
  std::map<std::string, double> per_family_detection;

  std::size_t total() const { return tp + fp + tn + fn; }
};

/// Rank-statistic AUC; tied scores contribute one half.
std::optional<double> auc_mann_whitney(const std::vector<ScoredPrediction>& preds);

MetricsReport compute_report(const std::vector<ScoredPrediction>& preds);

/// Malicious families: fraction predicted Malicious. "benign": fraction
/// predicted Benign. Families without samples are absent.
std::map<std::string, double> per_family_detection(const std::vector<ScoredPrediction>& preds);

struct AttackSuccess {
  double success_rate = 0.0;
  double clean_detection = 0.0;
  double adversarial_detection = 0.0;
};

/// Both reports must cover malicious-only corpora of equal size.
AttackSuccess attack_success_rate(const MetricsReport& clean, const MetricsReport& adv);

nlohmann::json to_json(const MetricsReport& r);
/// Aligned-column text: the headline rates, then one row per family.
std::string to_table(const MetricsReport& r);

}  // namespace dgalab::metrics

#endif  // DGALAB_METRICS_HPP
