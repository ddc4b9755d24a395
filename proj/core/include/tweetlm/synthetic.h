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

// Seeded generators for tweet-shaped fixtures. The real corpora (the
// pretraining dump, the offensiveness set, the NER set) are not shipped, so
// tests, benchmarks and the `synth` subcommand use these instead.

#ifndef TWEETLM_SYNTHETIC_H_
#define TWEETLM_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tweetlm/corpus.h"
#include "tweetlm/evaluation.h"

namespace tweetlm {

struct SyntheticTweetOptions {
  double mention_rate = 0.15;    // per word
  double url_rate = 0.05;        // per word
  double duplicate_rate = 0.10;  // per tweet, repeats an earlier text
  double short_rate = 0.05;      // per tweet, fewer than 3 words
  double foreign_rate = 0.05;    // per tweet, lang != "fr"
  size_t min_words = 3;
  size_t max_words = 25;
};

// French-looking tweets with accents, mentions, URLs, emoji, repeated texts
// and the occasional short or non-French tweet.
std::vector<RawTweet> SyntheticTweets(size_t n, uint64_t seed,
                                      const SyntheticTweetOptions& options = {});

// Sentences over a cycle of `cycle_len` distinct words where every word is
// followed by its successor, so a masked word is determined by its
// neighbours. Lengths are uniform in [min_words, max_words].
std::vector<std::string> CycleSentences(size_t n, uint64_t seed, size_t cycle_len = 20,
                                        size_t min_words = 6, size_t max_words = 12);

// Sentences that repeat a single theme word drawn from `n_themes` words.
// Packed blocks hold several sentences, so recovering a masked word needs
// attention to its own sentence rather than the whole block.
std::vector<std::string> ThemeSentences(size_t n, uint64_t seed, size_t n_themes = 20,
                                        size_t min_words = 12, size_t max_words = 20);

// Offensive tweets contain one word from a small insult lexicon; the others
// never do.
std::vector<LabeledTweet> SyntheticOffensiveSet(size_t n, double positive_fraction,
                                                uint64_t seed);

// BIO-tagged tweets where each entity type has its own gazetteer.
std::vector<ConllDocument> SyntheticNerDocs(size_t n, uint64_t seed);

}  // namespace tweetlm

#endif  // TWEETLM_SYNTHETIC_H_
