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

#ifndef TWEETLM_TOKENIZER_H_
#define TWEETLM_TOKENIZER_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tweetlm {

// U+2581, prefixed to every word before subword segmentation.
inline constexpr std::string_view kWordBoundary = "\xE2\x96\x81";

// Special tokens occupy the first ids of every vocabulary, in this order.
enum SpecialId : int32_t {
  kPadId = 0,
  kUnkId = 1,
  kBosId = 2,
  kEosId = 3,
  kMaskId = 4,
  kUserId = 5,
  kUrlId = 6,
  kNumSpecials = 7,
};

const std::vector<std::string>& SpecialTokens();

constexpr bool IsSpecialId(int32_t id) { return id >= 0 && id < kNumSpecials; }

// Bijection between token strings and contiguous ids.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws DataError on duplicates or if the specials are not the leading
  // entries in canonical order.
  explicit Vocabulary(std::vector<std::string> tokens);

  size_t size() const { return tokens_.size(); }
  const std::string& token(int32_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<int32_t> Find(std::string_view token) const;

  // FNV-1a over the id-ordered token list; stamped into shard headers.
  uint64_t Fingerprint() const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

// Ordered merge rules; rank = position.
class MergeTable {
 public:
  MergeTable() = default;
  // Throws DataError on duplicate pairs.
  explicit MergeTable(std::vector<std::pair<std::string, std::string>> merges);

  size_t size() const { return merges_.size(); }
  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }
  std::optional<size_t> Rank(std::string_view left, std::string_view right) const;

  bool operator==(const MergeTable& other) const {
    return merges_ == other.merges_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, size_t> ranks_;
};

// word_start[i] is 1 iff ids[i] begins a whitespace-delimited word.
struct EncodedSequence {
  std::vector<int32_t> ids;
  std::vector<uint8_t> word_start;

  size_t size() const { return ids.size(); }
  bool operator==(const EncodedSequence&) const = default;
};

// Immutable BPE segmenter. Encode/Decode are safe to call concurrently.
class Tokenizer {
 public:
  Tokenizer() = default;
  // Throws DataError if a merge output is missing from the vocabulary.
  Tokenizer(Vocabulary vocab, MergeTable merges);

  // Words equal to "@USER" or "HTTPURL" map to their special ids. Other words
  // are split into code points behind the boundary marker, merged in rank
  // order, and looked up; unknown symbols become <unk>.
  EncodedSequence Encode(std::string_view text) const;

  // Throws std::out_of_range naming the offending position.
  std::string Decode(std::span<const int32_t> ids) const;

  const Vocabulary& vocab() const { return vocab_; }
  const MergeTable& merges() const { return merges_; }

 private:
  std::vector<std::string> SegmentWord(std::string_view word) const;

  Vocabulary vocab_;
  MergeTable merges_;
};

struct BpeTrainOptions {
  size_t vocab_size = 32000;
  // Merging stops once the most frequent pair occurs fewer times than this.
  uint64_t min_pair_count = 2;
};

// Greedy frequency BPE over whitespace words. Ties between equally frequent
// pairs go to the lexicographically smallest (left, right) byte strings.
// Throws std::invalid_argument for an empty corpus or a vocab_size below
// specials + alphabet.
Tokenizer TrainBpe(std::span<const std::string> corpus,
                   const BpeTrainOptions& options);

void WriteTokenizer(const Tokenizer& tokenizer, std::ostream& out);
// Throws DataError on version mismatch, bad counts or truncation.
Tokenizer ReadTokenizer(std::istream& in);

void SaveTokenizer(const Tokenizer& tokenizer, const std::filesystem::path& path);
Tokenizer LoadTokenizer(const std::filesystem::path& path);

}  // namespace tweetlm

#endif  // TWEETLM_TOKENIZER_H_
