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

#include "dgalab/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dgalab/common.hpp"

namespace dgalab::metrics {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<ScoredPrediction> score_all(const network::LstmClassifier& model,
                                        const std::vector<corpus::LabeledSample>& samples,
                                        double threshold) {
  std::vector<ScoredPrediction> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double p = 0.0;
    try {
      p = network::predict(model, samples[i].name);
    } catch (const Error& e) {
      throw Error(e.kind(), "sample " + std::to_string(i) + ": " + e.what());
    }
    out.push_back({samples[i], p, classify(p, threshold)});
  }
  return out;
}

std::optional<double> auc_mann_whitney(const std::vector<ScoredPrediction>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds[a].score < preds[b].score; });
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && preds[order[j]].score == preds[order[i]].score) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (preds[order[k]].sample.label == corpus::Label::Malicious) {
        positive_rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = preds.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

MetricsReport compute_report(const std::vector<ScoredPrediction>& preds) {
  MetricsReport r;
  for (const auto& p : preds) {
    const bool actual = p.sample.label == corpus::Label::Malicious;
    const bool predicted = p.predicted == corpus::Label::Malicious;
    if (actual && predicted) ++r.tp;
    else if (!actual && predicted) ++r.fp;
    else if (!actual && !predicted) ++r.tn;
    else ++r.fn;
  }
  r.accuracy = ratio(r.tp + r.tn, r.total());
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.fpr = ratio(r.fp, r.fp + r.tn);
  r.fnr = ratio(r.fn, r.fn + r.tp);
  r.auc = auc_mann_whitney(preds);
  if (!r.auc) r.auc_note = "undefined: predictions cover a single class";
  r.per_family_detection = per_family_detection(preds);
  return r;
}

std::map<std::string, double> per_family_detection(const std::vector<ScoredPrediction>& preds) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // hits, total
  for (const auto& p : preds) {
    auto& c = counts[p.sample.family];
    c.second += 1;
    if (p.predicted == p.sample.label) c.first += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [family, c] : counts) out[family] = ratio(c.first, c.second);
  return out;
}

AttackSuccess attack_success_rate(const MetricsReport& clean, const MetricsReport& adv) {
  if (clean.fp + clean.tn != 0 || adv.fp + adv.tn != 0)
    fail(ErrorKind::Contract, "attack_success_rate expects malicious-only reports");
  if (clean.total() != adv.total())
    fail(ErrorKind::Contract, "attack_success_rate: corpus sizes differ (" +
                                  std::to_string(clean.total()) + " vs " +
                                  std::to_string(adv.total()) + ")");
  return {1.0 - adv.recall, clean.recall, adv.recall};
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j{{"tp", r.tp},           {"fp", r.fp},         {"tn", r.tn},
                   {"fn", r.fn},           {"accuracy", r.accuracy},
                   {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                   {"fpr", r.fpr},         {"fnr", r.fnr}};
  if (r.auc)
    j["auc"] = *r.auc;
  else
    j["auc"] = nullptr, j["auc_note"] = r.auc_note;
  j["per_family_detection"] = r.per_family_detection;
  return j;
}

std::string to_table(const MetricsReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s %-10s %-10s %-10s\n", "accuracy",
                "precision", "recall", "f1", "fpr", "fnr", "auc");
  out << line;
  std::string auc = r.auc ? std::to_string(*r.auc).substr(0, 6) : "n/a";
  std::snprintf(line, sizeof line, "%-10.4f %-10.4f %-10.4f %-10.4f %-10.4f %-10.4f %-10s\n",
                r.accuracy, r.precision, r.recall, r.f1, r.fpr, r.fnr, auc.c_str());
  out << line << '\n';
  std::size_t width = 6;
  for (const auto& [family, rate] : r.per_family_detection) width = std::max(width, family.size());
  std::snprintf(line, sizeof line, "%-*s  %s\n", static_cast<int>(width), "family",
                "detection_rate");
  out << line;
  for (const auto& [family, rate] : r.per_family_detection) {
    std::snprintf(line, sizeof line, "%-*s  %.4f\n", static_cast<int>(width), family.c_str(),
                  rate);
    out << line;
  }
  return out.str();
}

}  // namespace dgalab::metrics
