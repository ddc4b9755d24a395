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


#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tweetlm/corpus.h"
#include "tweetlm/rng.h"
#include "tweetlm/synthetic.h"

namespace tweetlm {
namespace {

std::vector<NormalizedTweet> Texts(std::initializer_list<const char*> texts) {
  std::vector<NormalizedTweet> out;
  for (const char* t : texts) out.push_back({t, CountWsTokens(t)});
  return out;
}

std::vector<std::string> TextsOf(const std::vector<NormalizedTweet>& tweets) {
  std::vector<std::string> out;
  for (const NormalizedTweet& t : tweets) out.push_back(t.text);
  return out;
}

RawTweet Raw(std::string text, std::optional<std::string> lang = std::nullopt) {
  return RawTweet{"0", std::move(text), std::move(lang), std::nullopt};
}

TEST(ParseTest, JsonlFieldsMapDirectly) {
  std::istringstream in(R"({"id":"1","text":"salut","lang":"fr"})" "\n");
  const std::vector<RawTweet> tweets = ParseTweetStream(in, TweetFormat::kJsonl);
  ASSERT_EQ(tweets.size(), 1u);
  EXPECT_EQ(tweets[0].id, "1");
  EXPECT_EQ(tweets[0].text, "salut");
  EXPECT_EQ(tweets[0].lang, "fr");
}

TEST(ParseTest, EmptyInput) {
  std::istringstream in("");
  ParseReport report;
  EXPECT_TRUE(ParseTweetStream(in, TweetFormat::kJsonl, &report).empty());
  EXPECT_EQ(report.n_malformed(), 0u);
}

TEST(ParseTest, MalformedLineIsCountedAndSkipped) {
  std::istringstream in(
      "{\"id\":\"1\",\"text\":\"bonjour\"}\n"
      "{\"id\":\"2\",\"text\":\n"
      "{\"id\":\"3\",\"text\":\"au revoir\"}\n");
  ParseReport report;
  const std::vector<RawTweet> tweets = ParseTweetStream(in, TweetFormat::kJsonl, &report);
  ASSERT_EQ(tweets.size(), 2u);
  EXPECT_EQ(tweets[0].id, "1");
  EXPECT_EQ(tweets[1].id, "3");
  EXPECT_EQ(report.malformed_lines, std::vector<uint64_t>{2});
}

TEST(ParseTest, MissingOrEmptyTextIsMalformed) {
  std::istringstream in("{\"id\":\"1\"}\n{\"text\":\"\"}\n[1,2]\n{\"text\":5}\n");
  ParseReport report;
  EXPECT_TRUE(ParseTweetStream(in, TweetFormat::kJsonl, &report).empty());
  EXPECT_EQ(report.n_malformed(), 4u);
}

TEST(ParseTest, PlainFormatUsesLineNumbers) {
  std::istringstream in("premier tweet\n\ntroisieme ligne\n");
  const std::vector<RawTweet> tweets = ParseTweetStream(in, TweetFormat::kPlain);
  ASSERT_EQ(tweets.size(), 2u);
  EXPECT_EQ(tweets[0].id, "1");
  EXPECT_EQ(tweets[1].id, "3");
  EXPECT_EQ(tweets[1].text, "troisieme ligne");
}

TEST(NormalizeTest, Examples) {
  EXPECT_EQ(NormalizeText("@jean salut https://t.co/abc"), "@USER salut HTTPURL");
  EXPECT_EQ(NormalizeText("bonjour"), "bonjour");
  EXPECT_EQ(NormalizeText("@a @b http://x.fr voir"), "@USER @USER HTTPURL voir");
}

TEST(NormalizeTest, WhitespaceAndEdgeCases) {
  EXPECT_EQ(NormalizeText("  a \t b\n\nc  "), "a b c");
  EXPECT_EQ(NormalizeText(""), "");
  EXPECT_EQ(NormalizeText("www.site.fr"), "HTTPURL");
  EXPECT_EQ(NormalizeText("@jean, merci"), "@USER, merci");
  EXPECT_EQ(NormalizeText("@ seul"), "@ seul");
  EXPECT_EQ(NormalizeText("mail@site.fr"), "mail@site.fr");
  EXPECT_EQ(NormalizeText("@USER HTTPURL"), "@USER HTTPURL");
}

TEST(NormalizeTest, Fixpoint) {
  for (const RawTweet& t : SyntheticTweets(2000, 5)) {
    const std::string once = NormalizeText(t.text);
    ASSERT_EQ(NormalizeText(once), once) << t.text;
  }
}

TEST(NormalizeTest, NoRawMentionsOrLinksSurvive) {
  for (const RawTweet& t : SyntheticTweets(2000, 6)) {
    std::istringstream words(NormalizeText(t.text));
    std::string w;
    while (words >> w) {
      ASSERT_NE(w.rfind("http://", 0), 0u) << w;
      ASSERT_NE(w.rfind("https://", 0), 0u) << w;
      if (w.size() > 1 && w[0] == '@') ASSERT_EQ(w.rfind("@USER", 0), 0u) << w;
    }
  }
}

TEST(CountWsTokensTest, Examples) {
  EXPECT_EQ(CountWsTokens("a b c"), 3u);
  EXPECT_EQ(CountWsTokens(""), 0u);
  EXPECT_EQ(CountWsTokens("@USER  salut   HTTPURL !"), 4u);
  EXPECT_EQ(CountWsTokens(" \t\n"), 0u);
}

TEST(FilterTest, LengthBoundary) {
  const std::vector<RawTweet> tweets = {Raw("un deux trois quatre"),
                                        Raw("un deux trois quatre cinq")};
  uint64_t dropped = 0;
  const auto kept = FilterTweets(tweets, 5, std::nullopt, &dropped);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].text, "un deux trois quatre cinq");
  EXPECT_EQ(kept[0].token_count, 5u);
  EXPECT_EQ(dropped, 1u);
}

TEST(FilterTest, TenTweetsThreeShort) {
  std::vector<RawTweet> tweets;
  for (int i = 0; i < 7; ++i) tweets.push_back(Raw("a b c d e f " + std::to_string(i)));
  tweets.push_back(Raw("a b"));
  tweets.push_back(Raw("@x https://t.co/y trop court"));
  tweets.push_back(Raw(""));
  uint64_t dropped = 0;
  EXPECT_EQ(FilterTweets(tweets, 5, std::nullopt, &dropped).size(), 7u);
  EXPECT_EQ(dropped, 3u);
}

TEST(FilterTest, CountsTokensAfterNormalization) {
  // Five tokens before and after; the URL counts once either way.
  const std::vector<RawTweet> tweets = {Raw("voir   https://t.co/a  ici  et  la")};
  const auto kept = FilterTweets(tweets, 5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].text, "voir HTTPURL ici et la");
}

TEST(FilterTest, LanguageFilter) {
  TweetFilter filter(1, "fr");
  EXPECT_TRUE(filter.Apply(Raw("bonjour", "fr")).has_value());
  EXPECT_FALSE(filter.Apply(Raw("hello", "en")).has_value());
  EXPECT_FALSE(filter.Apply(Raw("sans langue")).has_value());
  EXPECT_EQ(filter.n_dropped_lang(), 2u);
}

TEST(FilterTest, Monotonicity) {
  std::vector<RawTweet> tweets = SyntheticTweets(1000, 8);
  for (size_t k = 0; k < 12; ++k) {
    const std::vector<std::string> loose = TextsOf(FilterTweets(tweets, k));
    const std::vector<std::string> strict = TextsOf(FilterTweets(tweets, k + 1));
    const std::multiset<std::string> pool(loose.begin(), loose.end());
    for (const std::string& s : strict) ASSERT_TRUE(pool.count(s)) << s;
    ASSERT_LE(strict.size(), loose.size());
  }
}

TEST(DedupTest, KeepsFirstOccurrenceInOrder) {
  const auto out = Deduplicate(Texts({"a", "b", "a", "c", "b"}));
  EXPECT_EQ(TextsOf(out), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(DedupTest, AllUniqueIsIdentity) {
  const auto in = Texts({"x", "y", "z"});
  EXPECT_EQ(Deduplicate(in), in);
}

TEST(DedupTest, PlantedDuplicates) {
  Rng rng(31);
  std::vector<std::string> unique;
  for (int i = 0; i < 900; ++i) unique.push_back("ligne " + std::to_string(i) + " " +
                                                 std::to_string(rng.NextU64()));
  std::vector<NormalizedTweet> lines;
  for (const std::string& s : unique) lines.push_back({s, CountWsTokens(s)});
  for (int i = 0; i < 100; ++i) {
    const std::string& s = unique[rng.UniformInt(unique.size())];
    lines.insert(lines.begin() + static_cast<long>(rng.UniformInt(lines.size() + 1)),
                 {s, CountWsTokens(s)});
  }
  ASSERT_EQ(lines.size(), 1000u);
  const auto out = Deduplicate(lines);
  EXPECT_EQ(out.size(), 900u);

  // Sort-and-unique oracle.
  std::vector<std::string> sorted = TextsOf(lines);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::string> got = TextsOf(out);
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, sorted);
}

TEST(DedupTest, MatchesHashSetOracleAndIsIdempotent) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NormalizedTweet> lines;
    const size_t n = 1 + rng.UniformInt(2000);
    for (size_t i = 0; i < n; ++i) {
      const std::string s = "t" + std::to_string(rng.UniformInt(n / 2 + 1));
      lines.push_back({s, 1});
    }
    std::set<std::string> seen;
    std::vector<std::string> oracle;
    for (const NormalizedTweet& t : lines) {
      if (seen.insert(t.text).second) oracle.push_back(t.text);
    }
    const auto once = Deduplicate(lines);
    ASSERT_EQ(TextsOf(once), oracle);
    ASSERT_EQ(Deduplicate(once), once);
    ASSERT_EQ(Deduplicate(lines, /*exact_compare=*/true), once);
  }
}

TEST(DedupTest, StreamingCounters) {
  Deduplicator dedup;
  EXPECT_TRUE(dedup.Insert("a"));
  EXPECT_FALSE(dedup.Insert("a"));
  EXPECT_TRUE(dedup.Insert("b"));
  EXPECT_EQ(dedup.n_processed(), 3u);
  EXPECT_EQ(dedup.n_dropped(), 1u);
  EXPECT_EQ(dedup.n_unique(), 2u);
}

TEST(HashTest, DistinguishesTexts) {
  EXPECT_EQ(HashText("salut"), HashText("salut"));
  EXPECT_NE(HashText("salut"), HashText("salut "));
  EXPECT_NE(HashText(""), HashText(" "));
}

TEST(StatsTest, Examples) {
  const CorpusStats one = ComputeCorpusStats(Texts({"a b c d e"}));
  EXPECT_EQ(one.n_tweets, 1u);
  EXPECT_DOUBLE_EQ(one.mean_tokens, 5.0);
  EXPECT_EQ(one.n_bytes, 9u);
  const CorpusStats none = ComputeCorpusStats({});
  EXPECT_EQ(none.n_tweets, 0u);
  EXPECT_EQ(none.mean_tokens, 0.0);
}

TEST(StatsTest, MeanMatchesIndependentWordCount) {
  std::vector<NormalizedTweet> tweets;
  for (const RawTweet& t : SyntheticTweets(100, 12)) {
    const std::string s = NormalizeText(t.text);
    tweets.push_back({s, CountWsTokens(s)});
  }
  size_t words = 0;
  for (const NormalizedTweet& t : tweets) {
    std::istringstream in(t.text);
    std::string w;
    while (in >> w) ++words;
  }
  EXPECT_DOUBLE_EQ(ComputeCorpusStats(tweets).mean_tokens,
                   static_cast<double>(words) / 100.0);
}

TEST(StatsTest, JsonHasAllCounts) {
  const std::string json = CorpusStatsToJson(ComputeCorpusStats(Texts({"a b"})));
  for (const char* key : {"n_tweets", "n_bytes", "mean_tokens", "n_dropped_short",
                          "n_dropped_dup", "n_malformed"}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace tweetlm
