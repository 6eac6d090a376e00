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

// Two-layer character LSTM with a sigmoid head, exact reverse-mode
// gradients (parameters and input embeddings), BCE loss and Adam.

#ifndef DGALAB_NETWORK_HPP
#define DGALAB_NETWORK_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dgalab/corpus.hpp"
#include "dgalab/embedding.hpp"

namespace dgalab::network {

inline constexpr int kNumLayers = 2;

/// Gate weights stacked in blocks of `hidden` rows: input, forget, cell, output.
struct LstmLayerParams {
  Eigen::MatrixXd w;  // 4H x input
  Eigen::MatrixXd u;  // 4H x H
  Eigen::VectorXd b;  // 4H

  int hidden() const { return static_cast<int>(u.cols()); }
  int input() const { return static_cast<int>(w.cols()); }
};

/// Every trainable tensor. Also used as the shape of gradients and Adam moments.
struct Parameters {
  embedding::EmbeddingMatrix embedding;
  std::array<LstmLayerParams, kNumLayers> layers;
  Eigen::VectorXd head_w;
  double head_b = 0.0;

  /// Views over every tensor in checkpoint order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  static Parameters zeros(int dim, int hidden);
  Parameters zeros_like() const { return zeros(embedding.dim(), layers[0].hidden()); }
  bool same_shape(const Parameters& other) const;
  void set_zero();
  std::size_t size() const;
};

struct LstmClassifier {
  Parameters params;
  double dropout_rate = 0.5;

  int dim() const { return params.embedding.dim(); }
  int hidden() const { return params.layers[0].hidden(); }
};

struct ModelShape {
  int dim = 256;
  int hidden = 128;
  double dropout_rate = 0.5;
};

/// Embedding rows uniform in [-0.1, 0.1]; LSTM and head weights uniform in
/// +-1/sqrt(hidden); forget-gate bias 1, all other biases 0.
LstmClassifier init_classifier(std::uint64_t seed, const ModelShape& shape);

struct ForwardMode {
  bool train = false;
  std::uint64_t seed = 0;

  static ForwardMode eval() { return {false, 0}; }
  static ForwardMode training(std::uint64_t seed) { return {true, seed}; }
};

struct LayerTrace {
  Eigen::MatrixXd gates;   // 4H x T, post-activation (i, f, g, o)
  Eigen::MatrixXd cells;   // H x T
  Eigen::MatrixXd tanh_c;  // H x T
  Eigen::MatrixXd hidden;  // H x T
};

struct ForwardTrace {
  std::array<LayerTrace, kNumLayers> layers;
  Eigen::VectorXd dropout_scale;  // per hidden unit: 0 or 1/(1-rate); ones in eval
  double logit = 0.0;
  double p = 0.5;
  std::size_t length = 0;
};

struct ForwardResult {
  double p = 0.5;
  ForwardTrace trace;
};

ForwardResult forward(const LstmClassifier& model, const embedding::EmbeddingSequence& seq,
                      ForwardMode mode);

/// P(malicious) in eval mode.
double predict(const LstmClassifier& model, const embedding::EmbeddingSequence& seq);
double predict(const LstmClassifier& model, std::string_view name);

inline constexpr double kProbClamp = 1e-12;

double bce_loss(double p, corpus::Label y);

struct GradientSet {
  Parameters params;
  Eigen::MatrixXd input_grads;  // dim x T, column i = dL/dx_i
};

GradientSet backward(const LstmClassifier& model, const embedding::EmbeddingSequence& seq,
                     const ForwardTrace& trace, corpus::Label y);

/// Adds scale * dL/dtheta into `acc` (which must be shaped like the model).
/// Input gradients are written to `input_grads` when non-null.
void backward_accumulate(const LstmClassifier& model, const embedding::EmbeddingSequence& seq,
                         const ForwardTrace& trace, corpus::Label y, double scale,
                         Parameters& acc, Eigen::MatrixXd* input_grads);

struct AdamState {
  Parameters m;
  Parameters v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_model(const LstmClassifier& model);
};

void adam_step(LstmClassifier& model, const Parameters& grads, AdamState& state, double lr);

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  LstmClassifier model;
  std::optional<AdamState> adam;
};

std::vector<std::uint8_t> serialize_checkpoint(const LstmClassifier& model,
                                               const AdamState* state = nullptr);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const LstmClassifier& model, const AdamState* state,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgalab::network

#endif  // DGALAB_NETWORK_HPP
