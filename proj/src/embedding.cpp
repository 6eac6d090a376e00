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

#include "dgalab/embedding.hpp"

#include <cmath>

#include "dgalab/common.hpp"

namespace dgalab::embedding {

SnapCharset SnapCharset::domain_default() {
  return from_chars("abcdefghijklmnopqrstuvwxyz0123456789-");
}

SnapCharset SnapCharset::from_chars(std::string_view chars) {
  SnapCharset cs;
  for (char c : chars) {
    auto b = static_cast<std::uint8_t>(c);
    if (b == 0) fail(ErrorKind::Config, "snap charset may not contain the padding byte 0");
    cs.allowed_.set(b);
  }
  if (cs.allowed_.none()) fail(ErrorKind::Config, "snap charset is empty");
  return cs;
}

std::vector<std::uint8_t> SnapCharset::members() const {
  std::vector<std::uint8_t> out;
  for (int b = 0; b < kVocabSize; ++b)
    if (allowed_.test(static_cast<std::size_t>(b))) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

EmbeddingMatrix init_embeddings(std::uint64_t seed, int dim) {
  if (dim < 2) fail(ErrorKind::Config, "embedding dim must be >= 2");
  Rng rng(mix64(seed, 0xe4bedULL));
  EmbeddingMatrix m{Eigen::MatrixXd(kVocabSize, dim)};
  for (int r = 0; r < kVocabSize; ++r) {
    do {
      for (int c = 0; c < dim; ++c) m.values(r, c) = rng.uniform(-0.1, 0.1);
    } while (m.values.row(r).squaredNorm() == 0.0);
  }
  return m;
}

EmbeddingSequence encode(std::string_view name, const EmbeddingMatrix& m) {
  if (name.empty()) fail(ErrorKind::Domain, "cannot encode an empty name");
  EmbeddingSequence seq;
  seq.vectors.resize(m.dim(), static_cast<Eigen::Index>(name.size()));
  seq.byte_codes.reserve(name.size());
  for (std::size_t i = 0; i < name.size(); ++i) {
    auto b = static_cast<std::uint8_t>(name[i]);
    seq.byte_codes.push_back(b);
    seq.vectors.col(static_cast<Eigen::Index>(i)) = m.values.row(b).transpose();
  }
  return seq;
}

std::string decode(const std::vector<std::uint8_t>& byte_codes) {
  return std::string(byte_codes.begin(), byte_codes.end());
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Contract, "cosine_similarity: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) fail(ErrorKind::Domain, "cosine_similarity: zero-norm vector");
  return a.dot(b) / (na * nb);
}

std::uint8_t snap_to_char(const Eigen::Ref<const Eigen::VectorXd>& z, const EmbeddingMatrix& m,
                          const SnapCharset& charset) {
  if (z.size() != m.dim()) fail(ErrorKind::Contract, "snap_to_char: dimension mismatch");
  if (!z.allFinite()) fail(ErrorKind::Domain, "snap_to_char: non-finite vector");
  if (z.squaredNorm() == 0.0) fail(ErrorKind::Domain, "snap_to_char: zero vector");
  int best = -1;
  double best_sim = -2.0;
  for (int b = 0; b < kVocabSize; ++b) {
    if (!charset.contains(static_cast<std::uint8_t>(b))) continue;
    double sim = cosine_similarity(z, m.values.row(b).transpose());
    if (sim > best_sim) {  // strict: the earlier (lower) byte keeps ties
      best_sim = sim;
      best = b;
    }
  }
  return static_cast<std::uint8_t>(best);
}

}  // namespace dgalab::embedding
