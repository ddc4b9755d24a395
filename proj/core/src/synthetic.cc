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

#include "tweetlm/synthetic.h"

#include <array>
#include <stdexcept>
#include <string_view>

#include "tweetlm/rng.h"

namespace tweetlm {
namespace {

constexpr std::array<std::string_view, 48> kWords = {
    "je",     "tu",      "il",      "elle",    "on",       "nous",
    "vous",   "ils",     "le",      "la",      "les",      "un",
    "une",    "des",     "et",      "mais",    "donc",     "car",
    "très",   "trop",    "déjà",    "encore",  "ça",       "où",
    "être",   "avoir",   "aller",   "voir",    "faire",    "dire",
    "été",    "hiver",   "matin",   "soirée",  "café",     "métro",
    "école",  "rentrée", "député",  "élection", "équipe",  "match",
    "ciné",   "télé",    "vacances", "pluie",  "soleil",   "week-end"};

constexpr std::array<std::string_view, 8> kEmoji = {
    "😂", "❤️", "🙏", "🔥", "😭", "👍", "🇫🇷", "…"};

constexpr std::array<std::string_view, 6> kForeignWords = {
    "the", "and", "with", "weekend", "happy", "today"};

constexpr std::array<std::string_view, 20> kCycle = {
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
    "hotel", "india", "juliett", "kilo", "lima", "mike", "november",
    "oscar", "papa", "quebec", "romeo", "sierra", "tango"};

constexpr std::array<std::string_view, 8> kInsults = {
    "abruti", "crétin", "imbécile", "ordure", "connard", "débile", "minable",
    "idiot"};

constexpr std::array<std::string_view, 24> kNeutral = {
    "bonjour", "merci",  "demain",  "ville",  "travail", "musique",
    "famille", "amis",   "journée", "photo",  "livre",   "train",
    "repas",   "chat",   "chien",   "jardin", "plage",   "film",
    "concert", "radio",  "maison",  "route",  "nuit",    "fête"};

struct Gazetteer {
  std::string_view type;
  std::array<std::string_view, 4> entries;
};

const std::array<Gazetteer, 5>& Gazetteers() {
  static const std::array<Gazetteer, 5> kGaz = {{
      {"person", {"Emmanuel Macron", "Marie Curie", "Zinedine Zidane", "Victor Hugo"}},
      {"geoLoc", {"Paris", "Lyon", "Marseille", "Saint Malo"}},
      {"organisation", {"SNCF", "Assemblée nationale", "Croix Rouge", "Airbus"}},
      {"sportsTeam", {"PSG", "OM", "Olympique Lyonnais", "Stade Rennais"}},
      {"media", {"Le Monde", "France Inter", "BFMTV", "Libération"}},
  }};
  return kGaz;
}

template <typename Array>
std::string_view Pick(Rng& rng, const Array& items) {
  return items[rng.UniformInt(items.size())];
}

void AppendWord(std::string& text, std::string_view word) {
  if (!text.empty()) text += ' ';
  text += word;
}

}  // namespace

std::vector<RawTweet> SyntheticTweets(size_t n, uint64_t seed,
                                      const SyntheticTweetOptions& options) {
  if (options.min_words == 0 || options.min_words > options.max_words) {
    throw std::invalid_argument("SyntheticTweets: need 0 < min_words <= max_words");
  }
  Rng rng(DeriveSeed(seed, "synthetic_tweets"));
  std::vector<RawTweet> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    RawTweet tweet;
    tweet.id = std::to_string(1000000 + i);
    tweet.lang = "fr";
    if (!out.empty() && rng.Uniform() < options.duplicate_rate) {
      tweet.text = out[rng.UniformInt(out.size())].text;
      out.push_back(std::move(tweet));
      continue;
    }
    const bool foreign = rng.Uniform() < options.foreign_rate;
    if (foreign) tweet.lang = "en";
    size_t n_words = options.min_words +
                     rng.UniformInt(options.max_words - options.min_words + 1);
    if (rng.Uniform() < options.short_rate) n_words = 1 + rng.UniformInt(2);
    std::string text;
    for (size_t w = 0; w < n_words; ++w) {
      const double r = rng.Uniform();
      if (r < options.mention_rate) {
        AppendWord(text, "@user" + std::to_string(rng.UniformInt(500)));
      } else if (r < options.mention_rate + options.url_rate) {
        AppendWord(text, "https://t.co/" + std::to_string(rng.NextU64() % 1000000007));
      } else if (foreign) {
        AppendWord(text, Pick(rng, kForeignWords));
      } else {
        std::string word(Pick(rng, kWords));
        if (rng.Uniform() < 0.05) word += Pick(rng, kEmoji);
        if (rng.Uniform() < 0.05) word += rng.Uniform() < 0.5 ? "!" : "?";
        AppendWord(text, word);
      }
      // Irregular spacing exercises whitespace collapsing.
      if (rng.Uniform() < 0.03) text += rng.Uniform() < 0.5 ? "  " : "\t";
    }
    tweet.text = std::move(text);
    out.push_back(std::move(tweet));
  }
  return out;
}

std::vector<std::string> CycleSentences(size_t n, uint64_t seed, size_t cycle_len,
                                        size_t min_words, size_t max_words) {
  if (cycle_len < 2 || cycle_len > kCycle.size()) {
    throw std::invalid_argument("CycleSentences: cycle_len must be in [2, 20]");
  }
  if (min_words == 0 || min_words > max_words) {
    throw std::invalid_argument("CycleSentences: need 0 < min_words <= max_words");
  }
  Rng rng(DeriveSeed(seed, "cycle_sentences"));
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t len = min_words + rng.UniformInt(max_words - min_words + 1);
    size_t word = rng.UniformInt(cycle_len);
    std::string text;
    for (size_t k = 0; k < len; ++k) {
      AppendWord(text, kCycle[word]);
      word = (word + 1) % cycle_len;
    }
    out.push_back(std::move(text));
  }
  return out;
}

std::vector<std::string> ThemeSentences(size_t n, uint64_t seed, size_t n_themes,
                                        size_t min_words, size_t max_words) {
  if (n_themes == 0 || n_themes > kCycle.size()) {
    throw std::invalid_argument("ThemeSentences: n_themes must be in [1, 20]");
  }
  if (min_words == 0 || min_words > max_words) {
    throw std::invalid_argument("ThemeSentences: need 0 < min_words <= max_words");
  }
  Rng rng(DeriveSeed(seed, "theme_sentences"));
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t len = min_words + rng.UniformInt(max_words - min_words + 1);
    const std::string_view word = kCycle[rng.UniformInt(n_themes)];
    std::string text;
    for (size_t k = 0; k < len; ++k) AppendWord(text, word);
    out.push_back(std::move(text));
  }
  return out;
}

std::vector<LabeledTweet> SyntheticOffensiveSet(size_t n, double positive_fraction,
                                                uint64_t seed) {
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) {
    throw std::invalid_argument("positive_fraction must be in [0, 1]");
  }
  Rng rng(DeriveSeed(seed, "synthetic_offensive"));
  std::vector<LabeledTweet> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    LabeledTweet tweet;
    tweet.label = rng.Uniform() < positive_fraction ? kOffensive : kNotOffensive;
    const size_t len = 4 + rng.UniformInt(6);
    const size_t insult_at = rng.UniformInt(len);
    std::string text;
    if (rng.Uniform() < 0.3) text = "@USER";
    for (size_t k = 0; k < len; ++k) {
      if (tweet.label == kOffensive && k == insult_at) {
        AppendWord(text, Pick(rng, kInsults));
      } else {
        AppendWord(text, Pick(rng, kNeutral));
      }
    }
    tweet.text = std::move(text);
    out.push_back(std::move(tweet));
  }
  return out;
}

std::vector<ConllDocument> SyntheticNerDocs(size_t n, uint64_t seed) {
  Rng rng(DeriveSeed(seed, "synthetic_ner"));
  const auto& gazetteers = Gazetteers();
  std::vector<ConllDocument> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    ConllDocument doc;
    const size_t len = 4 + rng.UniformInt(8);
    for (size_t k = 0; k < len; ++k) {
      if (rng.Uniform() < 0.25) {
        const Gazetteer& gaz = gazetteers[rng.UniformInt(gazetteers.size())];
        const std::string_view entry = Pick(rng, gaz.entries);
        bool first = true;
        size_t pos = 0;
        while (pos <= entry.size()) {
          size_t end = entry.find(' ', pos);
          if (end == std::string_view::npos) end = entry.size();
          doc.tokens.emplace_back(entry.substr(pos, end - pos));
          doc.tags.push_back((first ? "B-" : "I-") + std::string(gaz.type));
          first = false;
          pos = end + 1;
        }
      } else if (rng.Uniform() < 0.1) {
        doc.tokens.emplace_back("@USER");
        doc.tags.emplace_back("O");
      } else {
        doc.tokens.emplace_back(Pick(rng, kNeutral));
        doc.tags.emplace_back("O");
      }
    }
    out.push_back(std::move(doc));
  }
  return out;
}

}  // namespace tweetlm
