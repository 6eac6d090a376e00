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

#include "dgalab/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "dgalab/common.hpp"

namespace dgalab::corpus {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                        s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Splits a CSV line with exactly two fields. Domains never contain commas.
bool split2(std::string_view line, std::string_view& a, std::string_view& b) {
  auto comma = line.find(',');
  if (comma == std::string_view::npos) return false;
  if (line.find(',', comma + 1) != std::string_view::npos) return false;
  a = trim(line.substr(0, comma));
  b = trim(line.substr(comma + 1));
  return true;
}

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

// Multiplicative congruential generator modulo 2^64 (Steele & Vigna multiplier).
class Mcg {
 public:
  explicit Mcg(std::uint64_t seed) : state_(mix64(seed) | 1ULL) {}
  std::uint32_t next() {
    state_ *= 0xd1342543de82ef95ULL;
    return static_cast<std::uint32_t>(state_ >> 32);
  }

 private:
  std::uint64_t state_;
};

constexpr std::string_view kTlds[] = {"com", "net", "org", "info", "biz", "ru", "cc"};

}  // namespace

LoadResult load_benign(const std::filesystem::path& path, std::size_t limit) {
  LoadResult result;
  if (limit == 0) return result;
  auto in = open_text(path);
  std::string line;
  std::size_t lineno = 0;
  while (result.records.size() < limit && std::getline(in, line)) {
    ++lineno;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    if (lineno == 1 && ascii_lower(row) == "rank,domain") continue;
    std::string_view rank, domain;
    if (!split2(row, rank, domain)) {
      result.skipped.push_back({lineno, "expected 2 comma-separated fields"});
      continue;
    }
    std::uint64_t rank_value = 0;
    auto [ptr, ec] = std::from_chars(rank.data(), rank.data() + rank.size(), rank_value);
    if (ec != std::errc() || ptr != rank.data() + rank.size()) {
      result.skipped.push_back({lineno, "rank is not an unsigned integer"});
      continue;
    }
    if (domain.empty()) {
      result.skipped.push_back({lineno, "empty domain"});
      continue;
    }
    result.records.push_back({std::string(domain), Source::BenignList, std::string(kBenignFamily)});
  }
  if (in.bad()) fail(ErrorKind::Io, "read failed: " + path.string());
  return result;
}

LoadResult load_dga_archive(const std::filesystem::path& path) {
  LoadResult result;
  auto in = open_text(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    if (lineno == 1 && ascii_lower(row) == "domain,family") continue;
    std::string_view domain, family;
    if (!split2(row, domain, family)) {
      result.skipped.push_back({lineno, "expected 2 comma-separated fields"});
      continue;
    }
    if (domain.empty() || family.empty()) {
      result.skipped.push_back({lineno, "empty domain or family"});
      continue;
    }
    result.records.push_back({std::string(domain), Source::DgaArchive, std::string(family)});
  }
  if (in.bad()) fail(ErrorKind::Io, "read failed: " + path.string());
  return result;
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = trim(line);
    if (!w.empty()) words.emplace_back(w);
  }
  return words;
}

std::vector<RawDomainRecord> synth_random_dga(std::uint64_t seed, unsigned family_id,
                                              std::size_t count) {
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  Mcg stream(mix64(seed, 0x5eed0000ULL + family_id));
  const std::string family = "synth_rand_" + std::to_string(family_id);
  std::vector<RawDomainRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t len = 12 + stream.next() % 21;
    std::string text;
    text.reserve(len + 5);
    for (std::size_t k = 0; k < len; ++k) text.push_back(kAlphabet[stream.next() % kAlphabet.size()]);
    text.push_back('.');
    text += kTlds[stream.next() % std::size(kTlds)];
    out.push_back({std::move(text), Source::Synthetic, family});
  }
  return out;
}

std::vector<RawDomainRecord> synth_dictionary_dga(std::uint64_t seed,
                                                  const std::vector<std::string>& wordlist,
                                                  std::size_t count) {
  if (wordlist.size() < 16)
    fail(ErrorKind::Config, "dictionary DGA needs at least 16 words, got " +
                                std::to_string(wordlist.size()));
  for (const auto& w : wordlist) {
    if (w.empty() || !std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
      fail(ErrorKind::Config, "wordlist entry is not [a-z]+: '" + w + "'");
  }
  Mcg stream(mix64(seed, 0xd1c70000ULL));
  std::vector<RawDomainRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t parts = 2 + stream.next() % 2;
    std::string text;
    for (std::size_t k = 0; k < parts; ++k) text += wordlist[stream.next() % wordlist.size()];
    text.push_back('.');
    text += kTlds[stream.next() % std::size(kTlds)];
    out.push_back({std::move(text), Source::Synthetic, "synth_dict"});
  }
  return out;
}

std::vector<RawDomainRecord> synth_benign(std::uint64_t seed, std::size_t count) {
  static constexpr std::string_view kOnsets[] = {
      "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w",
      "y", "z", "br", "cr", "dr", "fl", "fr", "gl", "gr", "pl", "pr", "sh", "sk", "sl", "sp",
      "st", "tr", "th", "ch", "wh", "qu", ""};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "a", "e", "o",
                                                 "ai", "ea", "ee", "oo", "ou", "y", "ie"};
  static constexpr std::string_view kCodas[] = {"", "", "", "", "n", "r", "s", "t", "l",
                                                "m", "ck", "ng", "st", "nd", "rt", "x"};
  static constexpr std::string_view kSuffixes[] = {"ly", "ify", "hub", "app", "web", "net",
                                                   "shop", "news", "online", "media", "labs"};
  static constexpr std::string_view kTldsBenign[] = {"com", "net", "org", "io", "de", "edu"};

  const auto& words = default_wordlist();
  Rng rng(mix64(seed, 0xbe9170000ULL));
  auto syllable = [&] {
    std::string s(kOnsets[rng.below(std::size(kOnsets))]);
    s += kVowels[rng.below(std::size(kVowels))];
    s += kCodas[rng.below(std::size(kCodas))];
    return s;
  };
  auto word = [&] { return words[rng.below(words.size())]; };

  std::unordered_set<std::string> seen;
  std::vector<RawDomainRecord> out;
  out.reserve(count);
  const std::size_t max_attempts = count * 64 + 64;
  for (std::size_t attempt = 0; out.size() < count && attempt < max_attempts; ++attempt) {
    std::string name;
    double style = rng.uniform();
    if (style < 0.35) {
      name = word() + word();
    } else if (style < 0.65) {
      std::size_t n = 2 + rng.below(2);
      for (std::size_t k = 0; k < n; ++k) name += syllable();
    } else if (style < 0.85) {
      name = word() + syllable();
    } else {
      name = (rng.uniform() < 0.5 ? word() : syllable() + syllable());
      name += kSuffixes[rng.below(std::size(kSuffixes))];
    }
    double extra = rng.uniform();
    if (extra < 0.04) {
      name.push_back(static_cast<char>('0' + rng.below(10)));
    } else if (extra < 0.07) {
      name.insert(name.size() / 2, "-");
    }
    if (name.size() < 3 || name.size() > 24 || !seen.insert(name).second) continue;
    name.push_back('.');
    name += kTldsBenign[rng.below(std::size(kTldsBenign))];
    out.push_back({std::move(name), Source::Synthetic, std::string(kBenignFamily)});
  }
  return out;
}

const std::vector<std::string>& default_wordlist() {
  static const std::vector<std::string> kWords = {
      "about", "account", "action", "air", "alpha", "apple", "art", "auto", "baby", "bank",
      "base", "bay", "beach", "bear", "best", "bird", "black", "blog", "blue", "board",
      "book", "box", "bright", "build", "business", "buy", "cafe", "call", "camp", "car",
      "card", "care", "cash", "cat", "center", "city", "class", "cloud", "club", "coast",
      "code", "cool", "cook", "corner", "craft", "cream", "daily", "data", "day", "deal",
      "design", "dog", "dream", "drive", "earth", "east", "easy", "eat", "edge", "energy",
      "event", "eye", "fair", "family", "farm", "fashion", "fast", "field", "film", "fire",
      "first", "fish", "fit", "flash", "flower", "food", "forest", "free", "fresh", "friend",
      "fun", "game", "garden", "gift", "global", "gold", "good", "great", "green", "group",
      "guide", "hand", "happy", "health", "heart", "hill", "home", "honey", "hope", "horse",
      "hot", "house", "idea", "image", "info", "island", "job", "joy", "key", "kid", "king",
      "lake", "land", "learn", "life", "light", "line", "link", "live", "local", "look",
      "love", "lucky", "magic", "mail", "main", "map", "market", "master", "media", "metro",
      "mind", "money", "moon", "motor", "mountain", "music", "nature", "new", "next", "night",
      "north", "ocean", "office", "open", "page", "paper", "park", "party", "pay", "people",
      "photo", "pixel", "place", "plan", "play", "point", "power", "press", "prime", "pro",
      "quick", "radio", "rain", "real", "red", "river", "road", "rock", "room", "royal",
      "safe", "sale", "school", "sea", "secure", "service", "shop", "show", "silver", "simple",
      "sky", "smart", "snow", "social", "soft", "solar", "sound", "south", "space", "sport",
      "star", "start", "stone", "store", "story", "street", "studio", "style", "sun", "super",
      "team", "tech", "time", "today", "top", "tour", "town", "trade", "travel", "tree",
      "true", "union", "united", "up", "urban", "valley", "video", "view", "village", "vision",
      "water", "wave", "way", "web", "west", "white", "wild", "wind", "wine", "winter",
      "wise", "wood", "word", "work", "world", "yellow", "young", "zone"};
  return kWords;
}

std::variant<LabeledSample, Rejection> normalize(const RawDomainRecord& record) {
  std::string text = ascii_lower(trim(record.text));
  if (!text.empty() && text.back() == '.') text.pop_back();  // fully-qualified form
  if (auto last = text.rfind('.'); last != std::string::npos) {
    text.erase(last);
    if (auto prev = text.rfind('.'); prev != std::string::npos) text.erase(0, prev + 1);
  }
  if (text.empty()) return Rejection{"empty registered label in '" + record.text + "'"};
  if (text.size() > kMaxNameLength) text.resize(kMaxNameLength);
  if (record.family.empty()) return Rejection{"empty family tag for '" + record.text + "'"};
  Label label = record.family == kBenignFamily ? Label::Benign : Label::Malicious;
  return LabeledSample{std::move(text), label, record.family};
}

std::vector<LabeledSample> normalize_all(const std::vector<RawDomainRecord>& records,
                                         std::size_t* rejected) {
  std::vector<LabeledSample> out;
  out.reserve(records.size());
  std::size_t dropped = 0;
  for (const auto& r : records) {
    auto n = normalize(r);
    if (auto* s = std::get_if<LabeledSample>(&n))
      out.push_back(std::move(*s));
    else
      ++dropped;
  }
  if (rejected) *rejected = dropped;
  return out;
}

DatasetSplit make_split(const std::vector<LabeledSample>& samples, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    fail(ErrorKind::Config, "train_fraction must lie in (0,1)");

  DatasetSplit split;
  std::vector<LabeledSample> unique;
  unique.reserve(samples.size());
  std::unordered_map<std::string, Label> seen;
  for (const auto& s : samples) {
    auto [it, inserted] = seen.emplace(s.name, s.label);
    if (inserted) {
      unique.push_back(s);
    } else {
      ++split.duplicates_dropped;
      if (it->second != s.label) ++split.label_conflicts;
    }
  }

  std::vector<std::size_t> benign_idx;
  std::size_t malicious = 0;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (unique[i].label == Label::Benign)
      benign_idx.push_back(i);
    else
      ++malicious;
  }
  if (benign_idx.empty() || malicious == 0)
    fail(ErrorKind::Config, "split needs at least one benign and one malicious sample");

  const std::size_t cap = spec.benign_cap.value_or(malicious);
  if (benign_idx.size() > cap) {
    Rng cap_rng(mix64(spec.seed, 0xca9));
    cap_rng.shuffle(benign_idx);
    std::vector<bool> drop(unique.size(), false);
    for (std::size_t k = cap; k < benign_idx.size(); ++k) drop[benign_idx[k]] = true;
    std::vector<LabeledSample> kept;
    kept.reserve(unique.size());
    for (std::size_t i = 0; i < unique.size(); ++i)
      if (!drop[i]) kept.push_back(std::move(unique[i]));
    unique = std::move(kept);
  }

  // Stratify by family in first-appearance order.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    auto [it, inserted] = strata.try_emplace(unique[i].family);
    if (inserted) order.push_back(unique[i].family);
    it->second.push_back(i);
  }
  Rng rng(mix64(spec.seed, 0x5711ULL));
  for (const auto& family : order) {
    auto& idx = strata[family];
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(idx.size())));
    n_train = std::min(n_train, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      (k < n_train ? split.train : split.test).push_back(unique[idx[k]]);
  }
  return split;
}

std::vector<LabeledSample> select_label(const std::vector<LabeledSample>& samples, Label label) {
  std::vector<LabeledSample> out;
  for (const auto& s : samples)
    if (s.label == label) out.push_back(s);
  return out;
}

}  // namespace dgalab::corpus
