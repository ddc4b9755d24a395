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

#ifndef TWEETLM_CORPUS_H_
#define TWEETLM_CORPUS_H_

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace tweetlm {

inline constexpr std::string_view kUserToken = "@USER";
inline constexpr std::string_view kUrlToken = "HTTPURL";

struct RawTweet {
  std::string id;
  std::string text;
  std::optional<std::string> lang;
  std::optional<std::string> created_at;
};

struct NormalizedTweet {
  std::string text;
  size_t token_count = 0;

  bool operator==(const NormalizedTweet&) const = default;
};

struct CorpusStats {
  uint64_t n_tweets = 0;
  uint64_t n_bytes = 0;
  double mean_tokens = 0.0;
  uint64_t n_dropped_short = 0;
  uint64_t n_dropped_dup = 0;
  uint64_t n_dropped_lang = 0;
  uint64_t n_malformed = 0;
};

enum class TweetFormat { kJsonl, kPlain };

// Per-line bookkeeping of a parse. Line numbers are 1-based.
struct ParseReport {
  uint64_t n_lines = 0;
  uint64_t n_parsed = 0;
  std::vector<uint64_t> malformed_lines;

  uint64_t n_malformed() const { return malformed_lines.size(); }
};

// Pull-based reader over newline-delimited tweets. Malformed lines (invalid
// JSON, missing or empty `text`) are recorded in report() and skipped. Blank
// lines are ignored in both formats. Plain-format tweets get their 1-based
// line number as id, as do JSONL records without one.
class TweetReader {
 public:
  TweetReader(std::istream& in, TweetFormat format);

  // Next well-formed tweet, or nullopt at end of stream. Throws
  // std::ios_base::failure if the stream goes bad mid-read.
  std::optional<RawTweet> Next();

  const ParseReport& report() const { return report_; }

 private:
  std::istream& in_;
  TweetFormat format_;
  ParseReport report_;
  std::string line_;
};

std::vector<RawTweet> ParseTweetStream(std::istream& in, TweetFormat format,
                                       ParseReport* report = nullptr);

// Replaces mentions with @USER and links with HTTPURL, collapses whitespace
// runs to one space and trims both ends.
//
// A mention is a token starting with '@' followed by one or more of
// [A-Za-z0-9_]; the handle prefix is replaced and any trailing characters
// ("@jean," -> "@USER,") are kept. A link is a token starting with
// "http://", "https://" or "www." and is replaced as a whole.
std::string NormalizeText(std::string_view text);

// Number of maximal runs of non-whitespace characters.
size_t CountWsTokens(std::string_view text);

// Normalization plus the length and language filters, one tweet at a time.
class TweetFilter {
 public:
  explicit TweetFilter(size_t min_tokens = 5,
                       std::optional<std::string> lang = std::nullopt);

  // The normalized tweet if it has at least min_tokens whitespace tokens
  // after normalization and matches the language filter (when set).
  std::optional<NormalizedTweet> Apply(const RawTweet& tweet);

  uint64_t n_dropped_short() const { return n_dropped_short_; }
  uint64_t n_dropped_lang() const { return n_dropped_lang_; }

 private:
  size_t min_tokens_;
  std::optional<std::string> lang_;
  uint64_t n_dropped_short_ = 0;
  uint64_t n_dropped_lang_ = 0;
};

std::vector<NormalizedTweet> FilterTweets(
    std::span<const RawTweet> tweets, size_t min_tokens = 5,
    std::optional<std::string> lang = std::nullopt,
    uint64_t* n_dropped_short = nullptr);

using Digest128 = std::array<uint64_t, 2>;

// 128-bit keyed SipHash of `text` under a fixed all-zero key.
Digest128 HashText(std::string_view text);

// Streaming first-occurrence filter. Keys are 128-bit digests of the text;
// a digest collision is treated as a duplicate unless exact_compare is set,
// in which case the full texts are kept and compared.
class Deduplicator {
 public:
  explicit Deduplicator(bool exact_compare = false);

  // True if `text` has not been seen before. Throws DataError carrying the
  // number of processed lines if the seen-set cannot grow.
  bool Insert(std::string_view text);

  uint64_t n_processed() const { return n_processed_; }
  uint64_t n_dropped() const { return n_dropped_; }
  size_t n_unique() const;

 private:
  struct DigestHash {
    size_t operator()(const Digest128& d) const noexcept {
      return static_cast<size_t>(d[0]);
    }
  };

  bool exact_compare_;
  std::unordered_set<Digest128, DigestHash> digests_;
  std::unordered_set<std::string> texts_;
  uint64_t n_processed_ = 0;
  uint64_t n_dropped_ = 0;
};

std::vector<NormalizedTweet> Deduplicate(std::span<const NormalizedTweet> tweets,
                                         bool exact_compare = false);

class StatsAccumulator {
 public:
  void Add(const NormalizedTweet& tweet);
  CorpusStats Finish() const;

 private:
  uint64_t n_tweets_ = 0;
  uint64_t n_bytes_ = 0;
  uint64_t n_tokens_ = 0;
};

// Counts and mean token length; mean_tokens is 0 for an empty stream.
CorpusStats ComputeCorpusStats(std::span<const NormalizedTweet> tweets);

std::string CorpusStatsToJson(const CorpusStats& stats);

}  // namespace tweetlm

#endif  // TWEETLM_CORPUS_H_
