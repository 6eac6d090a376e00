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

// Gradient-sign perturbation of character embeddings, snapped back to
// characters by cosine similarity.

#ifndef DGALAB_ADVERSARY_HPP
#define DGALAB_ADVERSARY_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "dgalab/corpus.hpp"
#include "dgalab/embedding.hpp"
#include "dgalab/network.hpp"

namespace dgalab::adversary {

struct AttackConfig {
  double epsilon = 0.0;
  embedding::SnapCharset charset = embedding::SnapCharset::domain_default();
  std::size_t n_adv = static_cast<std::size_t>(-1);
};

struct AdversarialSample {
  corpus::LabeledSample original;
  std::string crafted_name;
  double epsilon_used = 0.0;
  /// Positions whose snapped character differs from the original.
  std::size_t changed_positions = 0;
  /// Positions that received a non-zero perturbation, whether or not the
  /// snapped character changed.
  std::size_t perturbed_positions = 0;
  /// Positions where z was exactly zero and the original character was kept.
  std::size_t fallback_positions = 0;

  corpus::LabeledSample as_sample(std::string_view family_suffix = "") const;
};

/// Componentwise sign with sign(0) = 0.
Eigen::VectorXd sign_vec(const Eigen::Ref<const Eigen::VectorXd>& g);

/// z_i = x_i + epsilon * sign(dL/dx_i), with gradients taken in eval mode
/// against `label`. Returns the perturbed sequence (byte codes unchanged).
embedding::EmbeddingSequence perturb_embeddings(const network::LstmClassifier& model,
                                                const embedding::EmbeddingSequence& seq,
                                                corpus::Label label, double epsilon);

AdversarialSample perturb_sample(const network::LstmClassifier& model,
                                 const corpus::LabeledSample& sample, const AttackConfig& cfg);

struct SampleError {
  std::size_t index = 0;
  std::string message;
};

struct BatchResult {
  std::vector<AdversarialSample> crafted;
  std::vector<SampleError> errors;
};

/// Crafts the first min(n_adv, |samples|) samples in input order. A failing
/// sample is reported with its index and the batch continues.
BatchResult craft_batch(const network::LstmClassifier& model,
                        const std::vector<corpus::LabeledSample>& samples,
                        const AttackConfig& cfg);

struct SweepRow {
  double epsilon = 0.0;
  /// Fraction of crafted samples still classified as their true label.
  double detection_rate = 0.0;
  double mean_changed = 0.0;
  double mean_perturbed = 0.0;
  std::size_t samples = 0;
};

std::vector<SweepRow> epsilon_sweep(const network::LstmClassifier& model,
                                    const std::vector<corpus::LabeledSample>& samples,
                                    const std::vector<double>& epsilons,
                                    const embedding::SnapCharset& charset,
                                    double threshold = 0.5);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_table(const std::vector<SweepRow>& rows);

/// `domain,family` rows; family gets the suffix "+adv_eps<epsilon>".
std::string crafted_to_csv(const std::vector<AdversarialSample>& crafted);

}  // namespace dgalab::adversary

#endif  // DGALAB_ADVERSARY_HPP
