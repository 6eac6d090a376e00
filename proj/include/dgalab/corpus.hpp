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

// Domain corpora: loading benign and DGA lists, synthetic stand-in
// generators, normalization and stratified train/test splitting.

#ifndef DGALAB_CORPUS_HPP
#define DGALAB_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dgalab::corpus {

inline constexpr std::size_t kMaxNameLength = 75;
inline constexpr std::string_view kBenignFamily = "benign";

enum class Source { BenignList, DgaArchive, Synthetic };

struct RawDomainRecord {
  std::string text;
  Source source = Source::Synthetic;
  std::string family;
};

enum class Label : std::uint8_t { Benign = 0, Malicious = 1 };

inline double label_value(Label l) { return l == Label::Malicious ? 1.0 : 0.0; }

struct LabeledSample {
  std::string name;
  Label label = Label::Benign;
  std::string family;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct RowError {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<RawDomainRecord> records;
  std::vector<RowError> skipped;
};

/// Reads `rank,domain` rows (optional "rank,domain" header). Stops after
/// `limit` records. Malformed rows are skipped and reported with line numbers.
LoadResult load_benign(const std::filesystem::path& path, std::size_t limit);

/// Reads `domain,family` rows. The family tag is kept verbatim.
LoadResult load_dga_archive(const std::filesystem::path& path);

/// One lowercase word per line; blank lines ignored.
std::vector<std::string> load_wordlist(const std::filesystem::path& path);

/// Random-character DGA: 12-32 chars over [a-z0-9] from a seeded
/// multiplicative-congruential stream. Pure function of its arguments.
std::vector<RawDomainRecord> synth_random_dga(std::uint64_t seed, unsigned family_id,
                                              std::size_t count);

/// Dictionary DGA: each name concatenates 2-3 entries of `wordlist`.
/// Requires at least 16 entries, each matching [a-z]+.
std::vector<RawDomainRecord> synth_dictionary_dga(std::uint64_t seed,
                                                  const std::vector<std::string>& wordlist,
                                                  std::size_t count);

/// Pronounceable, word-like benign names (stand-in for a top-sites list).
/// Names are unique within one call.
std::vector<RawDomainRecord> synth_benign(std::uint64_t seed, std::size_t count);

/// Built-in list of short common English words.
const std::vector<std::string>& default_wordlist();

struct Rejection {
  std::string reason;
};

/// Lowercases, strips the final dot-separated label, keeps the registered
/// label (the one preceding it) and truncates to kMaxNameLength.
std::variant<LabeledSample, Rejection> normalize(const RawDomainRecord& record);

/// Normalizes a batch, dropping rejections (their count is returned).
std::vector<LabeledSample> normalize_all(const std::vector<RawDomainRecord>& records,
                                         std::size_t* rejected = nullptr);

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  /// Defaults to the malicious count when unset.
  std::optional<std::size_t> benign_cap;
};

struct DatasetSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
  /// Names seen again under the other class; the first label was kept.
  std::size_t label_conflicts = 0;
  std::size_t duplicates_dropped = 0;
};

DatasetSplit make_split(const std::vector<LabeledSample>& samples, const SplitSpec& spec);

std::vector<LabeledSample> select_label(const std::vector<LabeledSample>& samples, Label label);

}  // namespace dgalab::corpus

#endif  // DGALAB_CORPUS_HPP
