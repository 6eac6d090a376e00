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

#include "dgalab/adversary.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dgalab/common.hpp"

namespace dgalab::adversary {

corpus::LabeledSample AdversarialSample::as_sample(std::string_view family_suffix) const {
  return {crafted_name, original.label, original.family + std::string(family_suffix)};
}

Eigen::VectorXd sign_vec(const Eigen::Ref<const Eigen::VectorXd>& g) {
  return g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

embedding::EmbeddingSequence perturb_embeddings(const network::LstmClassifier& model,
                                                const embedding::EmbeddingSequence& seq,
                                                corpus::Label label, double epsilon) {
  if (!(epsilon >= 0.0)) fail(ErrorKind::Config, "epsilon must be >= 0");
  auto fwd = network::forward(model, seq, network::ForwardMode::eval());
  auto grads = network::backward(model, seq, fwd.trace, label);
  embedding::EmbeddingSequence z = seq;
  for (Eigen::Index i = 0; i < z.vectors.cols(); ++i)
    z.vectors.col(i) += epsilon * sign_vec(grads.input_grads.col(i));
  return z;
}

AdversarialSample perturb_sample(const network::LstmClassifier& model,
                                 const corpus::LabeledSample& sample, const AttackConfig& cfg) {
  if (sample.name.empty()) fail(ErrorKind::Domain, "cannot perturb an empty name");
  const auto& emb = model.params.embedding;
  auto seq = embedding::encode(sample.name, emb);

  AdversarialSample out;
  out.original = sample;
  out.epsilon_used = cfg.epsilon;
  if (cfg.epsilon == 0.0) {
    out.crafted_name = sample.name;
    return out;
  }

  auto z = perturb_embeddings(model, seq, sample.label, cfg.epsilon);
  out.crafted_name.resize(sample.name.size());
  for (std::size_t i = 0; i < sample.name.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const std::uint8_t orig = seq.byte_codes[i];
    if (z.vectors.col(col) != seq.vectors.col(col)) ++out.perturbed_positions;
    std::uint8_t snapped = orig;
    if (z.vectors.col(col).squaredNorm() == 0.0) {
      ++out.fallback_positions;
    } else {
      snapped = embedding::snap_to_char(z.vectors.col(col), emb, cfg.charset);
    }
    if (snapped != orig) ++out.changed_positions;
    out.crafted_name[i] = static_cast<char>(snapped);
  }
  return out;
}

BatchResult craft_batch(const network::LstmClassifier& model,
                        const std::vector<corpus::LabeledSample>& samples,
                        const AttackConfig& cfg) {
  BatchResult result;
  const std::size_t n = std::min(cfg.n_adv, samples.size());
  result.crafted.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      result.crafted.push_back(perturb_sample(model, samples[i], cfg));
    } catch (const Error& e) {
      result.errors.push_back({i, e.what()});
    }
  }
  return result;
}

std::vector<SweepRow> epsilon_sweep(const network::LstmClassifier& model,
                                    const std::vector<corpus::LabeledSample>& samples,
                                    const std::vector<double>& epsilons,
                                    const embedding::SnapCharset& charset, double threshold) {
  if (epsilons.empty()) fail(ErrorKind::Config, "epsilon sweep needs at least one epsilon");
  for (double e : epsilons)
    if (!(e >= 0.0)) fail(ErrorKind::Config, "epsilons must be non-negative");
  std::vector<SweepRow> rows;
  rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    AttackConfig cfg{eps, charset, samples.size()};
    auto batch = craft_batch(model, samples, cfg);
    if (!batch.errors.empty())
      fail(ErrorKind::Domain, "sample " + std::to_string(batch.errors.front().index) + ": " +
                                  batch.errors.front().message);
    SweepRow row;
    row.epsilon = eps;
    row.samples = batch.crafted.size();
    std::size_t detected = 0;
    for (const auto& a : batch.crafted) {
      const double p = network::predict(model, a.crafted_name);
      const auto predicted = p >= threshold ? corpus::Label::Malicious : corpus::Label::Benign;
      if (predicted == a.original.label) ++detected;
      row.mean_changed += static_cast<double>(a.changed_positions);
      row.mean_perturbed += static_cast<double>(a.perturbed_positions);
    }
    if (row.samples > 0) {
      const auto n = static_cast<double>(row.samples);
      row.detection_rate = static_cast<double>(detected) / n;
      row.mean_changed /= n;
      row.mean_perturbed /= n;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "epsilon,detection_rate,mean_changed\n";
  for (const auto& r : rows)
    out << format_double(r.epsilon) << ',' << format_double(r.detection_rate) << ','
        << format_double(r.mean_changed) << '\n';
  return out.str();
}

std::string sweep_to_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%10s %16s %14s %16s\n", "epsilon", "detection_rate",
                "mean_changed", "mean_perturbed");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%10g %16.4f %14.3f %16.3f\n", r.epsilon, r.detection_rate,
                  r.mean_changed, r.mean_perturbed);
    out << line;
  }
  return out.str();
}

std::string crafted_to_csv(const std::vector<AdversarialSample>& crafted) {
  std::ostringstream out;
  for (const auto& a : crafted)
    out << a.crafted_name << ',' << a.original.family << "+adv_eps"
        << format_double(a.epsilon_used) << '\n';
  return out.str();
}

}  // namespace dgalab::adversary
