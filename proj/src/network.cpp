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

#include "dgalab/network.hpp"

#include <boost/crc.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "bytes.hpp"
#include "dgalab/common.hpp"

namespace dgalab::network {
namespace {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::span<double> view(MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> view(VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> view(const MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> view(const VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline ArrayXd sigmoid(const ArrayXd& x) { return 1.0 / (1.0 + (-x).exp()); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void forward_layer(const LstmLayerParams& p, const MatrixXd& x, LayerTrace& tr, int layer) {
  const int h = p.hidden();
  const Eigen::Index steps = x.cols();
  MatrixXd pre = p.w * x;
  pre.colwise() += p.b;
  tr.gates.resize(4 * h, steps);
  tr.cells.resize(h, steps);
  tr.tanh_c.resize(h, steps);
  tr.hidden.resize(h, steps);

  VectorXd h_prev = VectorXd::Zero(h);
  VectorXd c_prev = VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    VectorXd a = pre.col(t);
    a.noalias() += p.u * h_prev;
    ArrayXd i = sigmoid(a.segment(0, h).array());
    ArrayXd f = sigmoid(a.segment(h, h).array());
    ArrayXd g = a.segment(2 * h, h).array().tanh();
    ArrayXd o = sigmoid(a.segment(3 * h, h).array());
    ArrayXd c = f * c_prev.array() + i * g;
    ArrayXd tc = c.tanh();
    ArrayXd hh = o * tc;
    if (!hh.allFinite() || !c.allFinite())
      fail(ErrorKind::Numeric, "non-finite activation at timestep " + std::to_string(t) +
                                   " (layer " + std::to_string(layer) + ")");
    tr.gates.col(t) << i.matrix(), f.matrix(), g.matrix(), o.matrix();
    tr.cells.col(t) = c.matrix();
    tr.tanh_c.col(t) = tc.matrix();
    tr.hidden.col(t) = hh.matrix();
    h_prev = hh.matrix();
    c_prev = c.matrix();
  }
}

// Reverse pass through one layer. `dh_out` holds dL/dh_t arriving from above
// for every timestep. Accumulates parameter gradients; returns dL/dx.
MatrixXd backward_layer(const LstmLayerParams& p, const MatrixXd& x, const LayerTrace& tr,
                        const MatrixXd& dh_out, LstmLayerParams& grad) {
  const int h = p.hidden();
  const Eigen::Index steps = x.cols();
  MatrixXd da(4 * h, steps);
  VectorXd dh_next = VectorXd::Zero(h);
  ArrayXd dc_next = ArrayXd::Zero(h);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto gates = tr.gates.col(t).array();
    ArrayXd i = gates.segment(0, h);
    ArrayXd f = gates.segment(h, h);
    ArrayXd g = gates.segment(2 * h, h);
    ArrayXd o = gates.segment(3 * h, h);
    ArrayXd tc = tr.tanh_c.col(t).array();
    ArrayXd c_prev = t > 0 ? ArrayXd(tr.cells.col(t - 1).array()) : ArrayXd::Zero(h);

    ArrayXd dh = dh_out.col(t).array() + dh_next.array();
    ArrayXd d_o = dh * tc;
    ArrayXd dc = dh * o * (1.0 - tc.square()) + dc_next;
    ArrayXd d_i = dc * g;
    ArrayXd d_g = dc * i;
    ArrayXd d_f = dc * c_prev;
    dc_next = dc * f;

    da.col(t) << (d_i * i * (1.0 - i)).matrix(), (d_f * f * (1.0 - f)).matrix(),
        (d_g * (1.0 - g.square())).matrix(), (d_o * o * (1.0 - o)).matrix();
    dh_next.noalias() = p.u.transpose() * da.col(t);
  }
  grad.w.noalias() += da * x.transpose();
  if (steps > 1)
    grad.u.noalias() += da.rightCols(steps - 1) * tr.hidden.leftCols(steps - 1).transpose();
  grad.b += da.rowwise().sum();
  return p.w.transpose() * da;
}

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

constexpr std::string_view kCheckpointMagic = "DGAL";

}  // namespace

std::vector<std::span<double>> Parameters::tensors() {
  std::vector<std::span<double>> out{view(embedding.values)};
  for (auto& l : layers) {
    out.push_back(view(l.w));
    out.push_back(view(l.u));
    out.push_back(view(l.b));
  }
  out.push_back(view(head_w));
  out.push_back({&head_b, 1});
  return out;
}

std::vector<std::span<const double>> Parameters::tensors() const {
  std::vector<std::span<const double>> out{view(embedding.values)};
  for (const auto& l : layers) {
    out.push_back(view(l.w));
    out.push_back(view(l.u));
    out.push_back(view(l.b));
  }
  out.push_back(view(head_w));
  out.push_back({&head_b, 1});
  return out;
}

Parameters Parameters::zeros(int dim, int hidden) {
  Parameters p;
  p.embedding.values = MatrixXd::Zero(embedding::kVocabSize, dim);
  int input = dim;
  for (auto& l : p.layers) {
    l.w = MatrixXd::Zero(4 * hidden, input);
    l.u = MatrixXd::Zero(4 * hidden, hidden);
    l.b = VectorXd::Zero(4 * hidden);
    input = hidden;
  }
  p.head_w = VectorXd::Zero(hidden);
  p.head_b = 0.0;
  return p;
}

bool Parameters::same_shape(const Parameters& other) const {
  auto a = tensors();
  auto b = other.tensors();
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].size() != b[k].size()) return false;
  return embedding.dim() == other.embedding.dim() &&
         layers[0].hidden() == other.layers[0].hidden();
}

void Parameters::set_zero() {
  for (auto t : tensors()) std::fill(t.begin(), t.end(), 0.0);
}

std::size_t Parameters::size() const {
  std::size_t n = 0;
  for (auto t : tensors()) n += t.size();
  return n;
}

LstmClassifier init_classifier(std::uint64_t seed, const ModelShape& shape) {
  if (shape.hidden < 1) fail(ErrorKind::Config, "hidden size must be >= 1");
  if (!(shape.dropout_rate >= 0.0 && shape.dropout_rate < 1.0))
    fail(ErrorKind::Config, "dropout rate must lie in [0,1)");
  LstmClassifier model;
  model.dropout_rate = shape.dropout_rate;
  model.params = Parameters::zeros(shape.dim, shape.hidden);
  model.params.embedding = embedding::init_embeddings(seed, shape.dim);

  Rng rng(mix64(seed, 0x1a7e5ULL));
  const double k = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  auto fill = [&](std::span<double> t) {
    for (double& v : t) v = rng.uniform(-k, k);
  };
  for (auto& l : model.params.layers) {
    fill(view(l.w));
    fill(view(l.u));
    l.b.setZero();
    l.b.segment(shape.hidden, shape.hidden).setOnes();
  }
  fill(view(model.params.head_w));
  model.params.head_b = 0.0;
  return model;
}

ForwardResult forward(const LstmClassifier& model, const embedding::EmbeddingSequence& seq,
                      ForwardMode mode) {
  if (seq.length() == 0) fail(ErrorKind::Domain, "forward: empty sequence");
  if (seq.vectors.rows() != model.dim() ||
      seq.vectors.cols() != static_cast<Eigen::Index>(seq.length()))
    fail(ErrorKind::Contract, "forward: sequence shape does not match model");

  ForwardResult r;
  ForwardTrace& tr = r.trace;
  tr.length = seq.length();
  forward_layer(model.params.layers[0], seq.vectors, tr.layers[0], 0);
  forward_layer(model.params.layers[1], tr.layers[0].hidden, tr.layers[1], 1);

  const int h = model.hidden();
  tr.dropout_scale = VectorXd::Ones(h);
  if (mode.train && model.dropout_rate > 0.0) {
    Rng rng(mix64(mode.seed, 0xd809ULL));
    const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
    for (int k = 0; k < h; ++k)
      tr.dropout_scale[k] = rng.uniform() < model.dropout_rate ? 0.0 : keep_scale;
  }
  const auto last = tr.layers[1].hidden.col(tr.layers[1].hidden.cols() - 1);
  tr.logit = model.params.head_w.dot(last.cwiseProduct(tr.dropout_scale)) + model.params.head_b;
  if (!std::isfinite(tr.logit)) fail(ErrorKind::Numeric, "non-finite logit");
  tr.p = sigmoid(tr.logit);
  r.p = tr.p;
  return r;
}

double predict(const LstmClassifier& model, const embedding::EmbeddingSequence& seq) {
  return forward(model, seq, ForwardMode::eval()).p;
}

double predict(const LstmClassifier& model, std::string_view name) {
  return predict(model, embedding::encode(name, model.params.embedding));
}

double bce_loss(double p, corpus::Label y) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y == corpus::Label::Malicious ? -std::log(q) : -std::log1p(-q);
}

void backward_accumulate(const LstmClassifier& model, const embedding::EmbeddingSequence& seq,
                         const ForwardTrace& trace, corpus::Label y, double scale,
                         Parameters& acc, Eigen::MatrixXd* input_grads) {
  const auto steps = static_cast<Eigen::Index>(seq.length());
  if (trace.length != seq.length() || trace.layers[0].hidden.cols() != steps ||
      trace.layers[1].hidden.cols() != steps || trace.layers[1].hidden.rows() != model.hidden() ||
      seq.vectors.cols() != steps)
    fail(ErrorKind::Contract, "backward: trace does not match sequence");
  if (!acc.same_shape(model.params)) fail(ErrorKind::Contract, "backward: gradient shape mismatch");

  const Parameters& p = model.params;
  const double dlogit = (trace.p - corpus::label_value(y)) * scale;
  const VectorXd last = trace.layers[1].hidden.col(steps - 1).cwiseProduct(trace.dropout_scale);
  acc.head_w += dlogit * last;
  acc.head_b += dlogit;

  MatrixXd dh2 = MatrixXd::Zero(model.hidden(), steps);
  dh2.col(steps - 1) = dlogit * p.head_w.cwiseProduct(trace.dropout_scale);
  MatrixXd dh1 = backward_layer(p.layers[1], trace.layers[0].hidden, trace.layers[1], dh2,
                                acc.layers[1]);
  MatrixXd dx = backward_layer(p.layers[0], seq.vectors, trace.layers[0], dh1, acc.layers[0]);
  for (Eigen::Index t = 0; t < steps; ++t)
    acc.embedding.values.row(seq.byte_codes[static_cast<std::size_t>(t)]) += dx.col(t).transpose();
  if (input_grads) *input_grads = std::move(dx);
}

GradientSet backward(const LstmClassifier& model, const embedding::EmbeddingSequence& seq,
                     const ForwardTrace& trace, corpus::Label y) {
  GradientSet g{model.params.zeros_like(), {}};
  backward_accumulate(model, seq, trace, y, 1.0, g.params, &g.input_grads);
  return g;
}

AdamState AdamState::for_model(const LstmClassifier& model) {
  AdamState s;
  s.m = model.params.zeros_like();
  s.v = model.params.zeros_like();
  return s;
}

void adam_step(LstmClassifier& model, const Parameters& grads, AdamState& state, double lr) {
  if (!grads.same_shape(model.params) || !state.m.same_shape(model.params) ||
      !state.v.same_shape(model.params))
    fail(ErrorKind::Contract, "adam_step: shape mismatch");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto theta = model.params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (std::size_t j = 0; j < theta[k].size(); ++j) {
      const double gj = g[k][j];
      m[k][j] = state.beta1 * m[k][j] + (1.0 - state.beta1) * gj;
      v[k][j] = state.beta2 * v[k][j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = m[k][j] / c1;
      const double vhat = v[k][j] / c2;
      theta[k][j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

std::vector<std::uint8_t> serialize_checkpoint(const LstmClassifier& model,
                                               const AdamState* state) {
  detail::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u16(kCheckpointVersion);
  const std::size_t payload_start = w.bytes().size();
  w.u32(static_cast<std::uint32_t>(model.dim()));
  w.u32(static_cast<std::uint32_t>(model.hidden()));
  w.u32(kNumLayers);
  w.f64(model.dropout_rate);
  w.u8(state ? 1 : 0);
  for (auto t : model.params.tensors()) w.f64s(t);
  if (state) {
    w.u64(state->step);
    w.f64(state->beta1);
    w.f64(state->beta2);
    w.f64(state->epsilon);
    for (auto t : state->m.tensors()) w.f64s(t);
    for (auto t : state->v.tensors()) w.f64s(t);
  }
  auto& bytes = w.bytes();
  std::uint32_t crc =
      crc32c(std::span<const std::uint8_t>(bytes).subspan(payload_start));
  w.u32(crc);
  return std::move(w.bytes());
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kPrefix = 4 + 2;
  if (bytes.size() < kPrefix + 4) fail(ErrorKind::Format, "checkpoint truncated");
  if (std::memcmp(bytes.data(), kCheckpointMagic.data(), 4) != 0)
    fail(ErrorKind::Format, "not a checkpoint (bad magic)");
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kCheckpointVersion)
    fail(ErrorKind::Format, "unsupported checkpoint version " + std::to_string(version));

  auto payload = bytes.subspan(kPrefix, bytes.size() - kPrefix - 4);
  detail::ByteReader crc_reader(bytes.subspan(bytes.size() - 4), "checkpoint");
  if (crc32c(payload) != crc_reader.u32()) fail(ErrorKind::Format, "checkpoint checksum mismatch");

  detail::ByteReader r(payload, "checkpoint");
  const std::uint32_t dim = r.u32();
  const std::uint32_t hidden = r.u32();
  const std::uint32_t layers = r.u32();
  if (layers != kNumLayers) fail(ErrorKind::Format, "checkpoint layer count must be 2");
  if (dim < 2 || dim > 1u << 16 || hidden < 1 || hidden > 1u << 16)
    fail(ErrorKind::Format, "checkpoint dimensions out of range");
  Checkpoint ck;
  ck.model.dropout_rate = r.f64();
  const bool has_adam = r.u8() != 0;
  ck.model.params = Parameters::zeros(static_cast<int>(dim), static_cast<int>(hidden));
  const std::size_t n = ck.model.params.size();
  const std::size_t expected = n * 8 + (has_adam ? 8 + 24 + 2 * n * 8 : 0);
  if (r.remaining() != expected) fail(ErrorKind::Format, "checkpoint size does not match header");
  for (auto t : ck.model.params.tensors()) r.f64s(t);
  if (has_adam) {
    AdamState s = AdamState::for_model(ck.model);
    s.step = r.u64();
    s.beta1 = r.f64();
    s.beta2 = r.f64();
    s.epsilon = r.f64();
    for (auto t : s.m.tensors()) r.f64s(t);
    for (auto t : s.v.tensors()) r.f64s(t);
    ck.adam = std::move(s);
  }
  return ck;
}

void save_checkpoint(const LstmClassifier& model, const AdamState* state,
                     const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(model, state));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

}  // namespace dgalab::network
