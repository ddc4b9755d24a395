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

#include "tweetlm/corpus.h"

#include <sodium.h>

#include <new>

#include "json.hpp"
#include "tweetlm/error.h"
#include "tweetlm/utf8.h"

namespace tweetlm {
namespace {

bool IsHandleChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

bool IsLink(std::string_view token) {
  return token.starts_with("http://") || token.starts_with("https://") ||
         token.starts_with("www.");
}

std::string_view StripCarriageReturn(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool IsBlank(std::string_view line) {
  for (char c : line) {
    if (!IsAsciiSpace(c)) return false;
  }
  return true;
}

std::optional<RawTweet> ParseJsonLine(std::string_view line, uint64_t line_no) {
  const auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_object()) return std::nullopt;
  const auto text = doc.find("text");
  if (text == doc.end() || !text->is_string()) return std::nullopt;
  RawTweet tweet;
  tweet.text = text->get<std::string>();
  if (tweet.text.empty()) return std::nullopt;
  if (const auto id = doc.find("id"); id != doc.end() && !id->is_null()) {
    tweet.id = id->is_string() ? id->get<std::string>() : id->dump();
  }
  if (tweet.id.empty()) tweet.id = std::to_string(line_no);
  if (const auto lang = doc.find("lang"); lang != doc.end() && lang->is_string()) {
    tweet.lang = lang->get<std::string>();
  }
  if (const auto ts = doc.find("created_at"); ts != doc.end() && ts->is_string()) {
    tweet.created_at = ts->get<std::string>();
  }
  return tweet;
}

void EnsureSodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

TweetReader::TweetReader(std::istream& in, TweetFormat format)
    : in_(in), format_(format) {}

std::optional<RawTweet> TweetReader::Next() {
  while (std::getline(in_, line_)) {
    ++report_.n_lines;
    const std::string_view line = StripCarriageReturn(line_);
    if (IsBlank(line)) continue;
    std::optional<RawTweet> tweet;
    if (format_ == TweetFormat::kJsonl) {
      tweet = ParseJsonLine(line, report_.n_lines);
    } else {
      tweet = RawTweet{std::to_string(report_.n_lines), std::string(line),
                       std::nullopt, std::nullopt};
    }
    if (!tweet) {
      report_.malformed_lines.push_back(report_.n_lines);
      continue;
    }
    ++report_.n_parsed;
    return tweet;
  }
  if (in_.bad()) {
    throw std::ios_base::failure("read error after line " +
                                 std::to_string(report_.n_lines));
  }
  return std::nullopt;
}

std::vector<RawTweet> ParseTweetStream(std::istream& in, TweetFormat format,
                                       ParseReport* report) {
  TweetReader reader(in, format);
  std::vector<RawTweet> out;
  while (auto tweet = reader.Next()) out.push_back(std::move(*tweet));
  if (report != nullptr) *report = reader.report();
  return out;
}

std::string NormalizeText(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::string_view token : SplitWhitespace(text)) {
    if (!out.empty()) out.push_back(' ');
    if (IsLink(token)) {
      out.append(kUrlToken);
      continue;
    }
    if (token.size() > 1 && token[0] == '@' && IsHandleChar(token[1])) {
      size_t end = 1;
      while (end < token.size() && IsHandleChar(token[end])) ++end;
      out.append(kUserToken);
      out.append(token.substr(end));
      continue;
    }
    out.append(token);
  }
  return out;
}

size_t CountWsTokens(std::string_view text) {
  size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = IsAsciiSpace(c);
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

TweetFilter::TweetFilter(size_t min_tokens, std::optional<std::string> lang)
    : min_tokens_(min_tokens), lang_(std::move(lang)) {}

std::optional<NormalizedTweet> TweetFilter::Apply(const RawTweet& tweet) {
  if (lang_ && tweet.lang != lang_) {
    ++n_dropped_lang_;
    return std::nullopt;
  }
  NormalizedTweet out;
  out.text = NormalizeText(tweet.text);
  out.token_count = CountWsTokens(out.text);
  if (out.token_count < min_tokens_) {
    ++n_dropped_short_;
    return std::nullopt;
  }
  return out;
}

std::vector<NormalizedTweet> FilterTweets(std::span<const RawTweet> tweets,
                                          size_t min_tokens,
                                          std::optional<std::string> lang,
                                          uint64_t* n_dropped_short) {
  TweetFilter filter(min_tokens, std::move(lang));
  std::vector<NormalizedTweet> out;
  for (const RawTweet& tweet : tweets) {
    if (auto kept = filter.Apply(tweet)) out.push_back(std::move(*kept));
  }
  if (n_dropped_short != nullptr) *n_dropped_short = filter.n_dropped_short();
  return out;
}

Digest128 HashText(std::string_view text) {
  EnsureSodium();
  static const unsigned char kKey[crypto_shorthash_siphashx24_KEYBYTES] = {};
  unsigned char out[crypto_shorthash_siphashx24_BYTES];
  crypto_shorthash_siphashx24(
      out, reinterpret_cast<const unsigned char*>(text.data()), text.size(),
      kKey);
  Digest128 digest{};
  for (int i = 0; i < 8; ++i) {
    digest[0] |= static_cast<uint64_t>(out[i]) << (8 * i);
    digest[1] |= static_cast<uint64_t>(out[8 + i]) << (8 * i);
  }
  return digest;
}

Deduplicator::Deduplicator(bool exact_compare) : exact_compare_(exact_compare) {}

bool Deduplicator::Insert(std::string_view text) {
  ++n_processed_;
  bool inserted;
  try {
    inserted = exact_compare_ ? texts_.emplace(text).second
                              : digests_.insert(HashText(text)).second;
  } catch (const std::bad_alloc&) {
    throw DataError("dedup seen-set exhausted memory after " +
                    std::to_string(n_processed_) + " lines");
  }
  if (!inserted) ++n_dropped_;
  return inserted;
}

size_t Deduplicator::n_unique() const {
  return exact_compare_ ? texts_.size() : digests_.size();
}

std::vector<NormalizedTweet> Deduplicate(std::span<const NormalizedTweet> tweets,
                                         bool exact_compare) {
  Deduplicator dedup(exact_compare);
  std::vector<NormalizedTweet> out;
  for (const NormalizedTweet& tweet : tweets) {
    if (dedup.Insert(tweet.text)) out.push_back(tweet);
  }
  return out;
}

void StatsAccumulator::Add(const NormalizedTweet& tweet) {
  ++n_tweets_;
  n_bytes_ += tweet.text.size();
  n_tokens_ += tweet.token_count;
}

CorpusStats StatsAccumulator::Finish() const {
  CorpusStats stats;
  stats.n_tweets = n_tweets_;
  stats.n_bytes = n_bytes_;
  stats.mean_tokens = n_tweets_ == 0 ? 0.0
                                     : static_cast<double>(n_tokens_) /
                                           static_cast<double>(n_tweets_);
  return stats;
}

CorpusStats ComputeCorpusStats(std::span<const NormalizedTweet> tweets) {
  StatsAccumulator acc;
  for (const NormalizedTweet& tweet : tweets) acc.Add(tweet);
  return acc.Finish();
}

std::string CorpusStatsToJson(const CorpusStats& stats) {
  nlohmann::ordered_json doc;
  doc["n_tweets"] = stats.n_tweets;
  doc["n_bytes"] = stats.n_bytes;
  doc["mean_tokens"] = stats.mean_tokens;
  doc["n_dropped_short"] = stats.n_dropped_short;
  doc["n_dropped_dup"] = stats.n_dropped_dup;
  doc["n_dropped_lang"] = stats.n_dropped_lang;
  doc["n_malformed"] = stats.n_malformed;
  return doc.dump(2);
}

}  // namespace tweetlm
