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

#ifndef DGALAB_EMBEDDING_HPP
#define DGALAB_EMBEDDING_HPP

#include <Eigen/Dense>

#include <bitset>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dgalab::embedding {

inline constexpr int kVocabSize = 256;

/// Row r is the learned vector for byte value r.
struct EmbeddingMatrix {
  Eigen::MatrixXd values;  // kVocabSize x dim

  int dim() const { return static_cast<int>(values.cols()); }
  Eigen::VectorXd row(std::uint8_t byte) const { return values.row(byte).transpose(); }
};

/// Encoded name. Column i of `vectors` is the embedding of byte_codes[i].
struct EmbeddingSequence {
  Eigen::MatrixXd vectors;  // dim x length
  std::vector<std::uint8_t> byte_codes;

  std::size_t length() const { return byte_codes.size(); }
};

/// Bytes eligible as snapping targets. Never contains the padding byte 0.
class SnapCharset {
 public:
  /// a-z, 0-9 and '-'.
  static SnapCharset domain_default();
  static SnapCharset from_chars(std::string_view chars);

  bool contains(std::uint8_t b) const { return allowed_.test(b); }
  std::size_t size() const { return allowed_.count(); }
  std::vector<std::uint8_t> members() const;

 private:
  std::bitset<kVocabSize> allowed_;
};

EmbeddingMatrix init_embeddings(std::uint64_t seed, int dim);

EmbeddingSequence encode(std::string_view name, const EmbeddingMatrix& m);
std::string decode(const std::vector<std::uint8_t>& byte_codes);

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

/// Allowed byte whose row is most cosine-similar to z; ties go to the lowest byte.
std::uint8_t snap_to_char(const Eigen::Ref<const Eigen::VectorXd>& z, const EmbeddingMatrix& m,
                          const SnapCharset& charset);

}  // namespace dgalab::embedding

#endif  // DGALAB_EMBEDDING_HPP
