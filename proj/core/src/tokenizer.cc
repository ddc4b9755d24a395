// Copyright 2026 The tweetlm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tweetlm/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tweetlm/corpus.h"
#include "tweetlm/error.h"
#include "tweetlm/rng.h"
#include "tweetlm/utf8.h"

namespace tweetlm {
namespace {

constexpr std::string_view kFileMagic = "tweetlm-bpe";
constexpr int kFileVersion = 1;

std::string MergeKey(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\n');
  key.append(right);
  return key;
}

// Incremental pair statistics for BPE training.
class PairCounter {
 public:
  explicit PairCounter(const std::vector<std::string>& symbols)
      : order_(Compare{&symbols, &counts_}) {}

  static uint64_t Key(int32_t a, int32_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  }
  static int32_t Left(uint64_t key) { return static_cast<int32_t>(key >> 32); }
  static int32_t Right(uint64_t key) {
    return static_cast<int32_t>(key & 0xffffffffu);
  }

  void Add(uint64_t key, int64_t delta) {
    auto it = counts_.find(key);
    const int64_t old = it == counts_.end() ? 0 : it->second;
    if (old > 0) order_.erase(key);
    const int64_t now = old + delta;
    if (now > 0) {
      counts_[key] = now;
      order_.insert(key);
    } else if (it != counts_.end()) {
      counts_.erase(it);
    }
  }

  bool empty() const { return order_.empty(); }
  uint64_t Best() const { return *order_.begin(); }
  int64_t Count(uint64_t key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

 private:
  struct Compare {
    const std::vector<std::string>* symbols;
    const std::unordered_map<uint64_t, int64_t>* counts;
    bool operator()(uint64_t x, uint64_t y) const {
      const int64_t cx = counts->at(x);
      const int64_t cy = counts->at(y);
      if (cx != cy) return cx > cy;
      const auto& s = *symbols;
      const int c = s[Left(x)].compare(s[Left(y)]);
      if (c != 0) return c < 0;
      return s[Right(x)] < s[Right(y)];
    }
  };

  std::unordered_map<uint64_t, int64_t> counts_;
  std::set<uint64_t, Compare> order_;
};

std::vector<int32_t> ApplyMerge(const std::vector<int32_t>& seq, int32_t a,
                                int32_t b, int32_t merged) {
  std::vector<int32_t> out;
  out.reserve(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i + 1 < seq.size() && seq[i] == a && seq[i + 1] == b) {
      out.push_back(merged);
      ++i;
    } else {
      out.push_back(seq[i]);
    }
  }
  return out;
}

bool IsSpecialWord(std::string_view word) {
  return word == kUserToken || word == kUrlToken;
}

}  // namespace

const std::vector<std::string>& SpecialTokens() {
  static const std::vector<std::string> kSpecials = {
      "<pad>", "<unk>", "<s>", "</s>", "<mask>",
      std::string(kUserToken), std::string(kUrlToken)};
  return kSpecials;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  const auto& specials = SpecialTokens();
  if (tokens_.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), tokens_.begin())) {
    throw DataError("vocabulary must start with the special tokens");
  }
  index_.reserve(tokens_.size());
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) {
      throw DataError("empty token at id " + std::to_string(i));
    }
    if (!index_.emplace(tokens_[i], static_cast<int32_t>(i)).second) {
      throw DataError("duplicate token '" + tokens_[i] + "' at id " +
                      std::to_string(i));
    }
  }
}

std::optional<int32_t> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

uint64_t Vocabulary::Fingerprint() const {
  uint64_t h = Fnv1a64("");
  for (const std::string& token : tokens_) {
    h = Fnv1a64(token, h);
    h = Fnv1a64("\n", h);
  }
  return h;
}

MergeTable::MergeTable(std::vector<std::pair<std::string, std::string>> merges)
    : merges_(std::move(merges)) {
  ranks_.reserve(merges_.size());
  for (size_t i = 0; i < merges_.size(); ++i) {
    const auto& [left, right] = merges_[i];
    if (!ranks_.emplace(MergeKey(left, right), i).second) {
      throw DataError("duplicate merge '" + left + " " + right + "' at rank " +
                      std::to_string(i));
    }
  }
}

std::optional<size_t> MergeTable::Rank(std::string_view left,
                                       std::string_view right) const {
  auto it = ranks_.find(MergeKey(left, right));
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

Tokenizer::Tokenizer(Vocabulary vocab, MergeTable merges)
    : vocab_(std::move(vocab)), merges_(std::move(merges)) {
  for (const auto& [left, right] : merges_.merges()) {
    if (!vocab_.Find(left + right)) {
      throw DataError("merge output '" + left + right + "' not in vocabulary");
    }
  }
}

std::vector<std::string> Tokenizer::SegmentWord(std::string_view word) const {
  std::vector<std::string> symbols;
  symbols.emplace_back(kWordBoundary);
  for (std::string& cp : SplitCodePoints(word)) symbols.push_back(std::move(cp));

  while (symbols.size() > 1) {
    size_t best_rank = SIZE_MAX;
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      if (auto rank = merges_.Rank(symbols[i], symbols[i + 1]);
          rank && *rank < best_rank) {
        best_rank = *rank;
        best_pos = i;
      }
    }
    if (best_rank == SIZE_MAX) break;
    const std::string left = symbols[best_pos];
    const std::string right = symbols[best_pos + 1];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == left &&
          symbols[i + 1] == right) {
        merged.push_back(left + right);
        ++i;
      } else {
        merged.push_back(std::move(symbols[i]));
      }
    }
    symbols = std::move(merged);
  }
  return symbols;
}

EncodedSequence Tokenizer::Encode(std::string_view text) const {
  EncodedSequence out;
  for (std::string_view word : SplitWhitespace(text)) {
    if (word == kUserToken) {
      out.ids.push_back(kUserId);
      out.word_start.push_back(1);
      continue;
    }
    if (word == kUrlToken) {
      out.ids.push_back(kUrlId);
      out.word_start.push_back(1);
      continue;
    }
    bool first = true;
    for (const std::string& symbol : SegmentWord(word)) {
      out.ids.push_back(vocab_.Find(symbol).value_or(kUnkId));
      out.word_start.push_back(first ? 1 : 0);
      first = false;
    }
  }
  return out;
}

std::string Tokenizer::Decode(std::span<const int32_t> ids) const {
  std::string joined;
  for (size_t i = 0; i < ids.size(); ++i) {
    const int32_t id = ids[i];
    if (id < 0 || static_cast<size_t>(id) >= vocab_.size()) {
      throw std::out_of_range("token id " + std::to_string(id) +
                              " at position " + std::to_string(i) +
                              " is outside the vocabulary of size " +
                              std::to_string(vocab_.size()));
    }
    if (id == kUserId || id == kUrlId) joined.append(kWordBoundary);
    joined.append(vocab_.token(id));
  }
  std::string out;
  out.reserve(joined.size());
  size_t pos = 0;
  while (pos < joined.size()) {
    if (joined.compare(pos, kWordBoundary.size(), kWordBoundary) == 0) {
      out.push_back(' ');
      pos += kWordBoundary.size();
    } else {
      out.push_back(joined[pos++]);
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

Tokenizer TrainBpe(std::span<const std::string> corpus,
                   const BpeTrainOptions& options) {
  if (corpus.empty()) throw std::invalid_argument("BPE corpus is empty");

  std::map<std::string, uint64_t, std::less<>> word_freq;
  for (const std::string& line : corpus) {
    for (std::string_view word : SplitWhitespace(line)) {
      if (IsSpecialWord(word)) continue;
      auto it = word_freq.find(word);
      if (it == word_freq.end()) {
        word_freq.emplace(std::string(word), 1);
      } else {
        ++it->second;
      }
    }
  }

  std::vector<std::string> symbols;
  std::unordered_map<std::string, int32_t> symbol_ids;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] =
        symbol_ids.emplace(s, static_cast<int32_t>(symbols.size()));
    if (inserted) symbols.push_back(s);
    return it->second;
  };

  std::vector<std::vector<int32_t>> words;
  std::vector<uint64_t> freqs;
  std::set<std::string> alphabet{std::string(kWordBoundary)};
  intern(std::string(kWordBoundary));
  for (const auto& [word, freq] : word_freq) {
    std::vector<int32_t> seq{symbol_ids.at(std::string(kWordBoundary))};
    for (const std::string& cp : SplitCodePoints(word)) {
      alphabet.insert(cp);
      seq.push_back(intern(cp));
    }
    words.push_back(std::move(seq));
    freqs.push_back(freq);
  }
  if (words.empty()) {
    throw std::invalid_argument("BPE corpus contains no trainable words");
  }

  const size_t minimum = SpecialTokens().size() + alphabet.size();
  if (options.vocab_size < minimum) {
    throw std::invalid_argument(
        "vocab_size " + std::to_string(options.vocab_size) +
        " is below the minimum " + std::to_string(minimum) + " (" +
        std::to_string(SpecialTokens().size()) + " specials + " +
        std::to_string(alphabet.size()) + " alphabet symbols)");
  }

  std::vector<std::string> vocab_tokens = SpecialTokens();
  std::unordered_map<std::string, bool> in_vocab;
  for (const std::string& s : vocab_tokens) in_vocab[s] = true;
  for (const std::string& s : alphabet) {
    vocab_tokens.push_back(s);
    in_vocab[s] = true;
  }

  PairCounter pairs(symbols);
  std::unordered_map<uint64_t, std::vector<int32_t>> where;
  auto count_word = [&](int32_t w, int64_t sign) {
    const auto& seq = words[w];
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
      const uint64_t key = PairCounter::Key(seq[i], seq[i + 1]);
      pairs.Add(key, sign * static_cast<int64_t>(freqs[w]));
      if (sign > 0) where[key].push_back(w);
    }
  };
  for (int32_t w = 0; w < static_cast<int32_t>(words.size()); ++w) {
    count_word(w, +1);
  }

  std::vector<std::pair<std::string, std::string>> merges;
  std::vector<uint64_t> visited(words.size(), 0);
  uint64_t stamp = 0;
  while (vocab_tokens.size() < options.vocab_size && !pairs.empty()) {
    const uint64_t best = pairs.Best();
    if (pairs.Count(best) < static_cast<int64_t>(options.min_pair_count)) break;
    const int32_t a = PairCounter::Left(best);
    const int32_t b = PairCounter::Right(best);
    const std::string merged_str = symbols[a] + symbols[b];
    const int32_t merged = intern(merged_str);
    merges.emplace_back(symbols[a], symbols[b]);
    if (!in_vocab[merged_str]) {
      in_vocab[merged_str] = true;
      vocab_tokens.push_back(merged_str);
    }

    ++stamp;
    const std::vector<int32_t> candidates = std::move(where[best]);
    where.erase(best);
    for (int32_t w : candidates) {
      if (visited[w] == stamp) continue;
      visited[w] = stamp;
      std::vector<int32_t> next = ApplyMerge(words[w], a, b, merged);
      if (next.size() == words[w].size()) continue;
      count_word(w, -1);
      words[w] = std::move(next);
      count_word(w, +1);
    }
  }

  return Tokenizer(Vocabulary(std::move(vocab_tokens)),
                   MergeTable(std::move(merges)));
}

void WriteTokenizer(const Tokenizer& tokenizer, std::ostream& out) {
  const auto& tokens = tokenizer.vocab().tokens();
  const auto& merges = tokenizer.merges().merges();
  out << kFileMagic << ' ' << kFileVersion << ' ' << tokens.size() << ' '
      << merges.size() << '\n';
  for (const std::string& token : tokens) out << token << '\n';
  for (const auto& [left, right] : merges) out << left << ' ' << right << '\n';
  if (!out) throw std::ios_base::failure("failed to write vocabulary");
}

Tokenizer ReadTokenizer(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("vocabulary file is empty");
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  size_t n_tokens = 0;
  size_t n_merges = 0;
  if (!(header >> magic >> version >> n_tokens >> n_merges) ||
      magic != kFileMagic) {
    throw DataError("not a tweetlm vocabulary file");
  }
  if (version != kFileVersion) {
    throw DataError("unsupported vocabulary version " + std::to_string(version) +
                    " (expected " + std::to_string(kFileVersion) + ")");
  }
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (size_t i = 0; i < n_tokens; ++i) {
    if (!std::getline(in, line)) {
      throw DataError("vocabulary truncated at token " + std::to_string(i) +
                      " of " + std::to_string(n_tokens));
    }
    tokens.push_back(line);
  }
  std::vector<std::pair<std::string, std::string>> merges;
  merges.reserve(n_merges);
  for (size_t i = 0; i < n_merges; ++i) {
    if (!std::getline(in, line)) {
      throw DataError("vocabulary truncated at merge " + std::to_string(i) +
                      " of " + std::to_string(n_merges));
    }
    const size_t space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
        line.find(' ', space + 1) != std::string::npos) {
      throw DataError("malformed merge at rank " + std::to_string(i));
    }
    merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  if (std::getline(in, line)) {
    throw DataError("trailing data after " + std::to_string(n_merges) +
                    " merges");
  }
  return Tokenizer(Vocabulary(std::move(tokens)), MergeTable(std::move(merges)));
}

void SaveTokenizer(const Tokenizer& tokenizer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  WriteTokenizer(tokenizer, out);
}

Tokenizer LoadTokenizer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return ReadTokenizer(in);
}

}  // namespace tweetlm
