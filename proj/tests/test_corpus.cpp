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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "dgalab/common.hpp"
#include "dgalab/corpus.hpp"
#include "support.hpp"

using namespace dgalab;
using namespace dgalab::corpus;

namespace {

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("dgalab_corpus_" + std::to_string(counter_++))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path file(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p) << content;
    return p;
  }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

LabeledSample sample(const std::string& text, const std::string& family) {
  auto r = normalize({text, Source::Synthetic, family});
  return std::get<LabeledSample>(r);
}

// Greedy-free dictionary parse: can `s` be written as 2 or 3 words from `words`?
bool splits_into_words(const std::string& s, const std::set<std::string>& words, int min_parts,
                       int max_parts) {
  std::function<bool(std::size_t, int)> go = [&](std::size_t pos, int parts) {
    if (pos == s.size()) return parts >= min_parts;
    if (parts == max_parts) return false;
    for (std::size_t len = 1; pos + len <= s.size(); ++len)
      if (words.count(s.substr(pos, len)) && go(pos + len, parts + 1)) return true;
    return false;
  };
  return go(0, 0);
}

}  // namespace

TEST(LoadBenign, ParsesRowsAndHonoursLimit) {
  TempDir d;
  auto p = d.file("top.csv", "1,google.com\n2,youtube.com\n3,facebook.com\n");
  auto r = load_benign(p, 2);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].text, "google.com");
  EXPECT_EQ(r.records[1].text, "youtube.com");
  EXPECT_EQ(r.records[0].family, kBenignFamily);
  EXPECT_EQ(r.records[0].source, Source::BenignList);
  EXPECT_TRUE(load_benign(p, 0).records.empty());
}

TEST(LoadBenign, FewerRowsThanLimitAndHeader) {
  TempDir d;
  auto p = d.file("top.csv", "rank,domain\n1,a.com\n2,b.com\n3,c.com\n4,d.com\n5,e.com\n");
  EXPECT_EQ(load_benign(p, 10).records.size(), 5u);
}

TEST(LoadBenign, MalformedRowsAreSkippedWithLineNumbers) {
  TempDir d;
  auto p = d.file("top.csv", "1,a.com\nnot-a-row\nx,b.com\n4,c.com\n");
  auto r = load_benign(p, 100);
  EXPECT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.skipped.size(), 2u);
  EXPECT_EQ(r.skipped[0].line, 2u);
  EXPECT_EQ(r.skipped[1].line, 3u);
}

TEST(LoadBenign, MissingFileIsIoError) {
  try {
    load_benign("/nonexistent/dgalab/top.csv", 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(LoadDgaArchive, FamiliesAndEmptyFile) {
  TempDir d;
  auto p = d.file("one.csv", "47faeb4f1b75a48499ba14e9b1cd895a.net,murofet\n");
  auto r = load_dga_archive(p);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].family, "murofet");
  EXPECT_EQ(r.records[0].source, Source::DgaArchive);
  EXPECT_TRUE(load_dga_archive(d.file("empty.csv", "")).records.empty());

  std::string fixture = "domain,family\n";
  for (const char* fam : {"a", "b", "c"})
    for (int i = 0; i < 10; ++i) fixture += "x" + std::to_string(i) + fam + ".com," + fam + "\n";
  auto fx = load_dga_archive(d.file("three.csv", fixture));
  EXPECT_EQ(fx.records.size(), 30u);
  std::set<std::string> families;
  for (const auto& rec : fx.records) families.insert(rec.family);
  EXPECT_EQ(families.size(), 3u);
}

TEST(SynthRandomDga, DeterministicAndSeedSensitive) {
  EXPECT_TRUE(synth_random_dga(1, 0, 0).empty());
  auto a = synth_random_dga(1, 0, 100);
  auto b = synth_random_dga(1, 0, 100);
  ASSERT_EQ(a.size(), 100u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].text, b[i].text);
  auto c = synth_random_dga(2, 0, 100);
  std::set<std::string> sa, sc;
  for (const auto& r : a) sa.insert(r.text);
  for (const auto& r : c) sc.insert(r.text);
  std::vector<std::string> shared;
  std::set_intersection(sa.begin(), sa.end(), sc.begin(), sc.end(), std::back_inserter(shared));
  EXPECT_LT(shared.size(), 5u);
  EXPECT_EQ(a[0].family, "synth_rand_0");
}

TEST(SynthRandomDga, NamesAreAlphanumericWithTld) {
  for (const auto& r : synth_random_dga(3, 2, 200)) {
    auto s = std::get<LabeledSample>(normalize(r));
    EXPECT_GE(s.name.size(), 12u);
    EXPECT_LE(s.name.size(), 32u);
    for (char ch : s.name) EXPECT_TRUE(std::isalnum(static_cast<unsigned char>(ch))) << s.name;
    EXPECT_EQ(s.label, Label::Malicious);
  }
}

TEST(SynthDictionaryDga, EveryNameSplitsIntoListedWords) {
  std::vector<std::string> words = {"red",   "blue",  "green", "sun",  "moon", "star",
                                    "river", "stone", "cloud", "fire", "leaf", "wind",
                                    "snow",  "rain",  "hill",  "lake"};
  std::set<std::string> dict(words.begin(), words.end());
  EXPECT_TRUE(synth_dictionary_dga(4, words, 0).empty());
  auto out = synth_dictionary_dga(4, words, 1000);
  ASSERT_EQ(out.size(), 1000u);
  for (const auto& r : out) {
    auto s = std::get<LabeledSample>(normalize(r));
    EXPECT_TRUE(splits_into_words(s.name, dict, 2, 3)) << s.name;
  }
  auto again = synth_dictionary_dga(4, words, 1000);
  EXPECT_EQ(again[17].text, out[17].text);
}

TEST(SynthDictionaryDga, SmallWordlistIsConfigError) {
  try {
    synth_dictionary_dga(1, {"red", "blue"}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(SynthBenign, UniqueAndDeterministic) {
  auto a = synth_benign(9, 2000);
  std::set<std::string> names;
  for (const auto& r : a) {
    names.insert(std::get<LabeledSample>(normalize(r)).name);
    EXPECT_EQ(r.family, kBenignFamily);
  }
  EXPECT_EQ(names.size(), 2000u);
  EXPECT_EQ(synth_benign(9, 2000)[1234].text, a[1234].text);
}

TEST(Normalize, Examples) {
  auto g = sample("Google.COM", "benign");
  EXPECT_EQ(g.name, "google");
  EXPECT_EQ(g.label, Label::Benign);
  auto m = sample("47faeb4f1b75a48499ba14e9b1cd895a.net", "murofet");
  EXPECT_EQ(m.name.size(), 32u);
  EXPECT_EQ(m.label, Label::Malicious);
  EXPECT_TRUE(std::holds_alternative<Rejection>(normalize({".com", Source::BenignList, "benign"})));
  EXPECT_EQ(sample("www.example.co.", "benign").name, "example");
  EXPECT_EQ(sample(std::string(100, 'a') + ".com", "x").name.size(), kMaxNameLength);
  EXPECT_TRUE(std::holds_alternative<Rejection>(normalize({"abc.com", Source::DgaArchive, ""})));
}

TEST(Normalize, IdempotentOnRandomInputs) {
  Rng rng(31);
  static const std::string alphabet = "abcXYZ019-.";
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const std::size_t len = 1 + rng.below(90);
    for (std::size_t k = 0; k < len; ++k) text += alphabet[rng.below(alphabet.size())];
    auto first = normalize({text, Source::Synthetic, "f"});
    if (std::holds_alternative<Rejection>(first)) continue;
    const auto& s = std::get<LabeledSample>(first);
    EXPECT_LE(s.name.size(), kMaxNameLength);
    EXPECT_EQ(s.name.find('.'), std::string::npos);
    auto second = normalize({s.name, Source::Synthetic, "f"});
    ASSERT_TRUE(std::holds_alternative<LabeledSample>(second)) << text;
    EXPECT_EQ(std::get<LabeledSample>(second).name, s.name) << text;
  }
}

TEST(MakeSplit, ArithmeticAndDeterminism) {
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(sample("benign" + std::to_string(i), "benign"));
  for (int i = 0; i < 10; ++i) samples.push_back(sample("dga" + std::to_string(i), "fam"));
  auto a = make_split(samples, {0.9, 3, std::nullopt});
  EXPECT_EQ(a.train.size(), 18u);
  EXPECT_EQ(a.test.size(), 2u);
  auto b = make_split(samples, {0.9, 3, std::nullopt});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(MakeSplit, BenignCap) {
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(sample("b" + std::to_string(i), "benign"));
  for (int i = 0; i < 100; ++i) samples.push_back(sample("m" + std::to_string(i), "fam"));
  auto s = make_split(samples, {0.9, 1, 100});
  auto count = [](const std::vector<LabeledSample>& v, Label l) {
    return std::count_if(v.begin(), v.end(), [&](const auto& x) { return x.label == l; });
  };
  EXPECT_EQ(count(s.train, Label::Benign) + count(s.test, Label::Benign), 100);
  // Default cap equals the malicious count.
  auto d = make_split(samples, {0.9, 1, std::nullopt});
  EXPECT_EQ(count(d.train, Label::Benign) + count(d.test, Label::Benign), 100);
}

TEST(MakeSplit, PropertiesOnDeskCorpus) {
  auto samples = dgalab::testing::desk_corpus(5, 600, 120);
  // Inject duplicates and one label conflict.
  samples.push_back(samples[3]);
  samples.push_back({samples[700].name, Label::Benign, "benign"});
  auto s = make_split(samples, {0.8, 12, std::nullopt});
  EXPECT_EQ(s.duplicates_dropped, 2u);
  EXPECT_EQ(s.label_conflicts, 1u);

  std::set<std::string> train_names, test_names;
  for (const auto& x : s.train) train_names.insert(x.name);
  for (const auto& x : s.test) test_names.insert(x.name);
  EXPECT_EQ(train_names.size(), s.train.size());
  for (const auto& n : test_names) EXPECT_EQ(train_names.count(n), 0u) << n;

  // Every family is stratified at the requested fraction.
  std::map<std::string, std::pair<int, int>> per_family;
  for (const auto& x : s.train) per_family[x.family].first++;
  for (const auto& x : s.test) per_family[x.family].second++;
  EXPECT_EQ(per_family.size(), 6u);
  for (const auto& [fam, counts] : per_family) {
    const double total = counts.first + counts.second;
    EXPECT_NEAR(counts.first / total, 0.8, 1.0 / total) << fam;
  }
}

TEST(MakeSplit, MissingClassIsConfigError) {
  std::vector<LabeledSample> only_benign = {sample("a", "benign"), sample("b", "benign")};
  try {
    make_split(only_benign, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(SelectLabel, FiltersInOrder) {
  std::vector<LabeledSample> v = {sample("a", "benign"), sample("b", "x"), sample("c", "x")};
  auto m = select_label(v, Label::Malicious);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].name, "b");
  EXPECT_EQ(m[1].name, "c");
}
