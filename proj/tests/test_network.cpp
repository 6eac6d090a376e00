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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "dgalab/network.hpp"
#include "support.hpp"

using namespace dgalab;
using namespace dgalab::network;
using corpus::Label;

namespace {

LstmClassifier tiny(std::uint64_t seed, int dim = 3, int hidden = 2) {
  return init_classifier(seed, {dim, hidden, 0.5});
}

}  // namespace

TEST(Network, ForwardMatchesPlainLoopReference) {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    auto m = tiny(trial, 2 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(4)));
    auto name = dgalab::testing::random_name(rng, 1, 9);
    auto seq = embedding::encode(name, m.params.embedding);
    const double expected = dgalab::testing::reference_forward(m, dgalab::testing::columns(seq.vectors));
    EXPECT_NEAR(forward(m, seq, ForwardMode::eval()).p, expected, 1e-12) << name;
    EXPECT_NEAR(predict(m, name), expected, 1e-12);
  }
}

TEST(Network, SingleUnitRecurrenceByHand) {
  // dim 2, hidden 1, every weight 0.5, biases 0, head weight 1.
  auto m = tiny(1, 2, 1);
  for (auto& layer : m.params.layers) {
    layer.w.setConstant(0.5);
    layer.u.setConstant(0.5);
    layer.b.setZero();
  }
  m.params.head_w.setConstant(1.0);
  m.params.head_b = 0.0;
  embedding::EmbeddingSequence seq;
  seq.vectors = Eigen::MatrixXd::Constant(2, 1, 1.0);
  seq.byte_codes = {'a'};

  // Layer 0: a = 0.5*1 + 0.5*1 = 1 for every gate.
  const double s1 = 1.0 / (1.0 + std::exp(-1.0));
  const double c0 = s1 * std::tanh(1.0);
  const double h0 = s1 * std::tanh(c0);
  // Layer 1: a = 0.5*h0 for every gate.
  const double a1 = 0.5 * h0;
  const double s2 = 1.0 / (1.0 + std::exp(-a1));
  const double c1 = s2 * std::tanh(a1);
  const double h1 = s2 * std::tanh(c1);
  const double p = 1.0 / (1.0 + std::exp(-h1));
  auto r = forward(m, seq, ForwardMode::eval());
  EXPECT_NEAR(r.p, p, 1e-15);
  EXPECT_NEAR(r.trace.layers[0].cells(0, 0), c0, 1e-15);
  EXPECT_NEAR(r.trace.layers[1].hidden(0, 0), h1, 1e-15);
}

TEST(Network, InitializationShapes) {
  auto m = init_classifier(5, {});
  EXPECT_EQ(m.dim(), 256);
  EXPECT_EQ(m.hidden(), 128);
  EXPECT_EQ(m.params.layers[0].w.rows(), 512);
  EXPECT_EQ(m.params.layers[0].w.cols(), 256);
  EXPECT_EQ(m.params.layers[1].w.cols(), 128);
  EXPECT_EQ(m.params.head_b, 0.0);
  // Forget-gate block starts at 1, the rest at 0.
  for (int j = 0; j < 128; ++j) {
    EXPECT_EQ(m.params.layers[0].b(128 + j), 1.0);
    EXPECT_EQ(m.params.layers[0].b(j), 0.0);
  }
  const double bound = 1.0 / std::sqrt(128.0);
  EXPECT_LE(m.params.layers[1].u.cwiseAbs().maxCoeff(), bound);
  EXPECT_LE(m.params.embedding.values.cwiseAbs().maxCoeff(), 0.1);
}

TEST(Network, EvalIsDeterministicTrainDropsUnits) {
  auto m = init_classifier(9, {8, 16, 0.5});
  auto seq = embedding::encode("example", m.params.embedding);
  EXPECT_EQ(forward(m, seq, ForwardMode::eval()).p, forward(m, seq, ForwardMode::eval()).p);
  auto a = forward(m, seq, ForwardMode::training(3));
  auto b = forward(m, seq, ForwardMode::training(3));
  EXPECT_EQ(a.p, b.p);
  int zeros = 0;
  for (int j = 0; j < 16; ++j) {
    const double s = a.trace.dropout_scale(j);
    EXPECT_TRUE(s == 0.0 || s == 2.0) << s;
    zeros += s == 0.0;
  }
  EXPECT_GT(zeros, 0);
  EXPECT_LT(zeros, 16);
  std::vector<double> scale(a.trace.dropout_scale.data(), a.trace.dropout_scale.data() + 16);
  EXPECT_NEAR(a.p, dgalab::testing::reference_forward(m, dgalab::testing::columns(seq.vectors), &scale), 1e-12);
}

TEST(Network, BceClampsAndMatchesDefinition) {
  EXPECT_NEAR(bce_loss(0.8, Label::Malicious), -std::log(0.8), 1e-15);
  EXPECT_NEAR(bce_loss(0.8, Label::Benign), -std::log(0.2), 1e-15);
  EXPECT_NEAR(bce_loss(0.0, Label::Malicious), -std::log(kProbClamp), 1e-9);
  // 1 - (1 - clamp) is not exactly the clamp in binary floating point.
  EXPECT_NEAR(bce_loss(1.0, Label::Benign), -std::log(1.0 - (1.0 - kProbClamp)), 1e-12);
  EXPECT_TRUE(std::isfinite(bce_loss(1.0, Label::Benign)));
}

TEST(Network, GradientsMatchFiniteDifferences) {
  Rng rng(2024);
  for (int trial = 0; trial < 6; ++trial) {
    const int hidden = trial % 2 ? 4 : 2;
    const int dim = trial % 3 ? 3 : 6;
    auto m = tiny(100 + trial, dim, hidden);
    auto name = dgalab::testing::random_name(rng, 1, 6);
    const auto y = trial % 2 ? Label::Malicious : Label::Benign;
    auto r = dgalab::testing::finite_difference_check(m, name, y);
    EXPECT_EQ(r.failures, 0u) << "max error " << r.max_rel_error << " on " << name;
    EXPECT_GT(r.checked, 0u);
  }
}

TEST(Network, TrainModeGradientMatchesFiniteDifference) {
  // Dropout masks depend only on the seed, so the loss is a smooth function
  // of the head weights at a fixed mask.
  auto m = init_classifier(4, {3, 4, 0.5});
  auto seq = embedding::encode("abc", m.params.embedding);
  const auto mode = ForwardMode::training(77);
  auto fwd = forward(m, seq, mode);
  auto g = backward(m, seq, fwd.trace, Label::Malicious);
  for (int j = 0; j < 4; ++j) {
    const double saved = m.params.head_w(j);
    m.params.head_w(j) = saved + 1e-6;
    const double up = bce_loss(forward(m, seq, mode).p, Label::Malicious);
    m.params.head_w(j) = saved - 1e-6;
    const double down = bce_loss(forward(m, seq, mode).p, Label::Malicious);
    m.params.head_w(j) = saved;
    EXPECT_NEAR(g.params.head_w(j), (up - down) / 2e-6, 1e-7);
  }
}

TEST(Network, EmbeddingGradientIsSumOfInputGradients) {
  auto m = tiny(3, 4, 3);
  auto seq = embedding::encode("abca", m.params.embedding);
  auto fwd = forward(m, seq, ForwardMode::eval());
  auto g = backward(m, seq, fwd.trace, Label::Malicious);
  Eigen::VectorXd a = g.input_grads.col(0) + g.input_grads.col(3);
  EXPECT_TRUE(g.params.embedding.values.row('a').transpose().isApprox(a, 1e-14));
  EXPECT_TRUE(g.params.embedding.values.row('b').transpose().isApprox(g.input_grads.col(1)));
  EXPECT_EQ(g.params.embedding.values.row('z').norm(), 0.0);
}

TEST(Network, BackwardRejectsMismatchedTrace) {
  auto m = tiny(3);
  auto seq = embedding::encode("abc", m.params.embedding);
  auto other = embedding::encode("abcd", m.params.embedding);
  auto fwd = forward(m, seq, ForwardMode::eval());
  EXPECT_THROW(backward(m, other, fwd.trace, Label::Benign), Error);
}

TEST(Network, AdamSingleCoordinateByHand) {
  auto m = tiny(1);
  auto state = AdamState::for_model(m);
  auto grads = m.params.zeros_like();
  const double lr = 0.01;
  double theta = m.params.head_b;
  double mm = 0, vv = 0;
  const std::array<double, 3> gs = {0.5, -1.0, 2.0};
  const auto before = m.params.head_w;
  for (std::size_t t = 1; t <= gs.size(); ++t) {
    grads.head_b = gs[t - 1];
    adam_step(m, grads, state, lr);
    mm = 0.9 * mm + 0.1 * gs[t - 1];
    vv = 0.999 * vv + 0.001 * gs[t - 1] * gs[t - 1];
    const double mhat = mm / (1 - std::pow(0.9, t));
    const double vhat = vv / (1 - std::pow(0.999, t));
    theta -= lr * mhat / (std::sqrt(vhat) + 1e-8);
    EXPECT_NEAR(m.params.head_b, theta, 1e-15);
  }
  EXPECT_EQ(state.step, 3u);
  // Zero gradients leave other tensors untouched.
  EXPECT_EQ(m.params.head_w, before);
}

TEST(Network, AdamFirstStepMovesByLearningRate) {
  auto m = tiny(2);
  auto state = AdamState::for_model(m);
  auto grads = m.params.zeros_like();
  grads.layers[1].u(0, 0) = 3.7;
  const double before = m.params.layers[1].u(0, 0);
  adam_step(m, grads, state, 0.001);
  EXPECT_NEAR(m.params.layers[1].u(0, 0), before - 0.001, 1e-10);
}

TEST(Network, AdamRejectsShapeMismatch) {
  auto m = tiny(2);
  auto state = AdamState::for_model(m);
  auto wrong = Parameters::zeros(4, 2);
  EXPECT_THROW(adam_step(m, wrong, state, 0.001), Error);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto m = init_classifier(8, {5, 3, 0.25});
  auto state = AdamState::for_model(m);
  auto grads = m.params.zeros_like();
  grads.head_w.setConstant(0.3);
  adam_step(m, grads, state, 0.01);

  auto bytes = serialize_checkpoint(m, &state);
  auto ck = parse_checkpoint(bytes);
  ASSERT_TRUE(ck.adam.has_value());
  EXPECT_EQ(ck.model.dropout_rate, 0.25);
  EXPECT_EQ(serialize_checkpoint(ck.model, &*ck.adam), bytes);
  auto a = m.params.tensors();
  auto b = ck.model.params.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(std::memcmp(a[i].data(), b[i].data(), a[i].size_bytes()), 0);
  EXPECT_EQ(ck.adam->step, 1u);

  auto no_adam = parse_checkpoint(serialize_checkpoint(m, nullptr));
  EXPECT_FALSE(no_adam.adam.has_value());
}

TEST(Checkpoint, HeaderAndCrcTrailer) {
  EXPECT_EQ(dgalab::testing::crc32c_bitwise(reinterpret_cast<const std::uint8_t*>("123456789"), 9),
            0xE3069283u);
  auto m = init_classifier(8, {4, 2, 0.5});
  auto bytes = serialize_checkpoint(m);
  ASSERT_GT(bytes.size(), 10u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DGAL");
  EXPECT_EQ(bytes[4] | (bytes[5] << 8), kCheckpointVersion);
  const std::size_t n = bytes.size();
  const std::uint32_t stored = bytes[n - 4] | (bytes[n - 3] << 8) | (bytes[n - 2] << 16) |
                               (static_cast<std::uint32_t>(bytes[n - 1]) << 24);
  EXPECT_EQ(stored, dgalab::testing::crc32c_bitwise(bytes.data() + 6, n - 10));
  // Payload size: header fields plus every double.
  const std::size_t doubles = m.params.size();
  EXPECT_EQ(n, 6 + 4 + 4 + 4 + 8 + 1 + doubles * 8 + 4);
}

TEST(Checkpoint, CorruptionIsDetected) {
  auto bytes = serialize_checkpoint(init_classifier(8, {4, 2, 0.5}));
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto copy = bytes;
    copy[rng.below(copy.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    EXPECT_THROW(parse_checkpoint(copy), Error);
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_THROW(parse_checkpoint(truncated), Error);
  auto version = bytes;
  version[4] = 9;
  try {
    parse_checkpoint(version);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
  }
}

TEST(Checkpoint, SaveAndLoadFile) {
  auto dir = std::filesystem::temp_directory_path() / "dgalab_ckpt_test";
  std::filesystem::create_directories(dir);
  auto m = init_classifier(8, {4, 2, 0.5});
  save_checkpoint(m, nullptr, dir / "m.ckpt");
  auto ck = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(predict(ck.model, "abc"), predict(m, "abc"));
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), Error);
  std::filesystem::remove_all(dir);
}
