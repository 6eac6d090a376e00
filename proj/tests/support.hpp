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

// Independent oracles shared by the unit tests and the acceptance binary.

#ifndef DGALAB_TESTS_SUPPORT_HPP
#define DGALAB_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dgalab/common.hpp"
#include "dgalab/corpus.hpp"
#include "dgalab/network.hpp"

namespace dgalab::testing {

// Plain-loop LSTM forward pass (no Eigen), eval mode unless a dropout scale
// vector is supplied. Returns P(malicious).
inline double reference_forward(const network::LstmClassifier& m,
                                 const std::vector<std::vector<double>>& xs,
                                 const std::vector<double>* dropout_scale = nullptr) {
  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  std::vector<std::vector<double>> input = xs;
  std::vector<double> h;
  for (const auto& layer : m.params.layers) {
    const int H = layer.hidden();
    const int In = layer.input();
    std::vector<double> hp(H, 0.0), c(H, 0.0);
    std::vector<std::vector<double>> out;
    for (const auto& x : input) {
      std::vector<double> a(4 * H);
      for (int r = 0; r < 4 * H; ++r) {
        double s = layer.b(r);
        for (int k = 0; k < In; ++k) s += layer.w(r, k) * x[k];
        for (int k = 0; k < H; ++k) s += layer.u(r, k) * hp[k];
        a[r] = s;
      }
      std::vector<double> hn(H);
      for (int j = 0; j < H; ++j) {
        const double i = sigmoid(a[j]);
        const double f = sigmoid(a[H + j]);
        const double g = std::tanh(a[2 * H + j]);
        const double o = sigmoid(a[3 * H + j]);
        c[j] = f * c[j] + i * g;
        hn[j] = o * std::tanh(c[j]);
      }
      hp = hn;
      out.push_back(hn);
    }
    input = out;
    h = hp;
  }
  double logit = m.params.head_b;
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double d = dropout_scale ? (*dropout_scale)[j] : 1.0;
    logit += m.params.head_w(static_cast<Eigen::Index>(j)) * h[j] * d;
  }
  return sigmoid(logit);
}

inline std::vector<std::vector<double>> columns(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.cols(); ++t)
    for (Eigen::Index k = 0; k < m.rows(); ++k) out[t].push_back(m(k, t));
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
};

// Central differences at step 1e-5 carry about 1e-11 of rounding noise for
// losses near 1, so magnitudes below 1e-6 are measured against that floor
// instead of against themselves.
constexpr double kGradientFloor = 1e-6;

inline double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), kGradientFloor});
  return std::abs(a - b) / denom;
}

// Compares every analytic gradient (all parameters and every input
// embedding) with central differences of the eval-mode BCE loss.
inline GradCheck finite_difference_check(network::LstmClassifier model,
                                         const std::string& name, corpus::Label y,
                                         double step = 1e-5, double tolerance = 1e-4) {
  using namespace network;
  GradCheck r;
  auto record = [&](double analytic, double numeric) {
    const double err = relative_error(analytic, numeric);
    r.max_rel_error = std::max(r.max_rel_error, err);
    ++r.checked;
    if (err >= tolerance) ++r.failures;
  };

  auto seq = embedding::encode(name, model.params.embedding);
  auto fwd = forward(model, seq, ForwardMode::eval());
  auto grads = backward(model, seq, fwd.trace, y);

  auto loss_of_model = [&](const LstmClassifier& m) {
    return bce_loss(forward(m, embedding::encode(name, m.params.embedding), ForwardMode::eval()).p,
                    y);
  };

  auto params = model.params.tensors();
  auto g = grads.params.tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double saved = params[t][i];
      params[t][i] = saved + step;
      const double up = loss_of_model(model);
      params[t][i] = saved - step;
      const double down = loss_of_model(model);
      params[t][i] = saved;
      const double numeric = (up - down) / (2 * step);
      // Embedding rows of unused bytes have zero gradient on both sides.
      record(g[t][i], numeric);
    }
  }

  for (Eigen::Index t = 0; t < seq.vectors.cols(); ++t) {
    for (Eigen::Index k = 0; k < seq.vectors.rows(); ++k) {
      auto s = seq;
      s.vectors(k, t) += step;
      const double up = bce_loss(forward(model, s, ForwardMode::eval()).p, y);
      s.vectors(k, t) -= 2 * step;
      const double down = bce_loss(forward(model, s, ForwardMode::eval()).p, y);
      record(grads.input_grads(k, t), (up - down) / (2 * step));
    }
  }
  return r;
}

inline std::string random_name(Rng& rng, std::size_t min_len, std::size_t max_len) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-";
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

// Bitwise reflected CRC-32C (polynomial 0x82F63B78).
inline std::uint32_t crc32c_bitwise(const std::uint8_t* data, std::size_t n) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0x82F63B78u & (0u - (crc & 1u)));
  }
  return ~crc;
}

// The desk-scale corpus: synthetic benign names plus five random-DGA families.
inline std::vector<corpus::LabeledSample> desk_corpus(std::uint64_t seed, std::size_t benign,
                                                      std::size_t per_family) {
  std::vector<corpus::RawDomainRecord> raw = corpus::synth_benign(seed, benign);
  for (unsigned f = 0; f < 5; ++f) {
    auto fam = corpus::synth_random_dga(seed, f, per_family);
    raw.insert(raw.end(), fam.begin(), fam.end());
  }
  return corpus::normalize_all(raw);
}

}  // namespace dgalab::testing

#endif  // DGALAB_TESTS_SUPPORT_HPP
