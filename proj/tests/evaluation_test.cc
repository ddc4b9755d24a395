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
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include "json.hpp"

#include "test_util.h"
#include "tweetlm/error.h"
#include "tweetlm/evaluation.h"
#include "tweetlm/rng.h"

namespace tweetlm {
namespace {

using Tags = std::vector<std::string>;

std::vector<ConllDocument> ParseString(const std::string& text,
                                       const std::vector<std::string>& types = CapEntityTypes()) {
  std::istringstream in(text);
  return ParseConll(in, types);
}

TEST(ParseConllTest, TwoDocuments) {
  const auto docs = ParseString("Paul B-person\nva O\n\nLyon B-geoLoc\n");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].tokens, (Tags{"Paul", "va"}));
  EXPECT_EQ(docs[0].tags, (Tags{"B-person", "O"}));
  EXPECT_EQ(docs[1].tags, (Tags{"B-geoLoc"}));
}

TEST(ParseConllTest, EmptyFile) {
  EXPECT_TRUE(ParseString("").empty());
  EXPECT_TRUE(ParseString("\n\n\n").empty());
}

TEST(ParseConllTest, TagIsLastColumn) {
  const auto docs = ParseString("Paul NNP B-person\r\nest VB O\r\n");
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].tokens, (Tags{"Paul", "est"}));
  EXPECT_EQ(docs[0].tags, (Tags{"B-person", "O"}));
}

TEST(ParseConllTest, BadTagReportsLineNumber) {
  for (const std::string bad : {"B-city", "X-person", "B-", "b-person", "person"}) {
    try {
      ParseString("a O\n\nb O\nc " + bad + "\n");
      FAIL() << bad;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(ParseString("lonely\n"), DataError);
}

TEST(ParseConllTest, OpenTagSet) {
  const auto docs = ParseString("a B-anything\nb I-anything\n", {});
  EXPECT_EQ(docs[0].tags[1], "I-anything");
}

TEST(ParseConllTest, CapFixtureHandCount) {
  std::ifstream in(std::string(TWEETLM_TEST_DATA_DIR) + "/cap_sample.conll");
  ASSERT_TRUE(in);
  const std::vector<ConllDocument> docs = ParseConll(in);
  ASSERT_EQ(docs.size(), 10u);
  std::vector<size_t> lengths;
  size_t b = 0, i = 0, o = 0, entities = 0;
  for (const ConllDocument& d : docs) {
    ASSERT_EQ(d.tokens.size(), d.tags.size());
    lengths.push_back(d.tokens.size());
    for (const std::string& t : d.tags) {
      b += t[0] == 'B';
      i += t[0] == 'I';
      o += t == "O";
    }
    entities += ExtractEntities(d.tags).size();
  }
  EXPECT_EQ(lengths, (std::vector<size_t>{7, 8, 5, 8, 7, 5, 10, 4, 7, 4}));
  EXPECT_EQ(b, 15u);
  EXPECT_EQ(i, 7u);
  EXPECT_EQ(o, 43u);
  EXPECT_EQ(entities, 15u);
  EXPECT_EQ(docs[1].tokens[1], "RER");
  EXPECT_EQ(docs[6].tags[4], "I-facility");
}

TEST(ParseConllTest, WriteRoundTrip) {
  std::ifstream in(std::string(TWEETLM_TEST_DATA_DIR) + "/cap_sample.conll");
  const std::vector<ConllDocument> docs = ParseConll(in);
  std::ostringstream out;
  WriteConll(out, docs);
  EXPECT_EQ(ParseString(out.str()), docs);
}

TEST(ExtractEntitiesTest, Examples) {
  EXPECT_EQ(ExtractEntities(Tags{"B-per", "I-per", "O", "B-geoLoc"}),
            (std::vector<EntitySpan>{{"per", 0, 2}, {"geoLoc", 3, 4}}));
  EXPECT_TRUE(ExtractEntities(Tags{"O", "O"}).empty());
  EXPECT_TRUE(ExtractEntities(Tags{}).empty());
  EXPECT_EQ(ExtractEntities(Tags{"I-per", "I-per", "B-per"}),
            (std::vector<EntitySpan>{{"per", 0, 2}, {"per", 2, 3}}));
  EXPECT_EQ(ExtractEntities(Tags{"B-per", "I-org", "I-org", "O", "I-per"}),
            (std::vector<EntitySpan>{{"per", 0, 1}, {"org", 1, 3}, {"per", 4, 5}}));
}

TEST(ExtractEntitiesTest, MatchesBruteForceChunks) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tags tags = testing::RandomTags(rng, rng.UniformInt(21), 1 + rng.UniformInt(5));
    std::set<std::tuple<std::string, size_t, size_t>> got;
    for (const EntitySpan& s : ExtractEntities(tags)) got.emplace(s.label, s.start, s.end);
    ASSERT_EQ(got, testing::BruteForceChunks(tags));
  }
}

TEST(ExtractEntitiesTest, RenderRoundTrip) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tags tags = testing::RandomTags(rng, rng.UniformInt(21), 3);
    const std::vector<EntitySpan> spans = ExtractEntities(tags);
    const Tags repaired = RenderBio(spans, tags.size());
    ASSERT_EQ(repaired.size(), tags.size());
    ASSERT_EQ(ExtractEntities(repaired), spans);
    ASSERT_EQ(RenderBio(ExtractEntities(repaired), repaired.size()), repaired);
    for (size_t k = 0; k < tags.size(); ++k) {
      if (tags[k][0] != 'I') ASSERT_EQ(repaired[k], tags[k]);
    }
  }
}

TEST(EntityPrfTest, PerfectPrediction) {
  const std::vector<Tags> gold = {{"B-per", "I-per", "O"}, {"O", "B-org"}};
  const MetricsReport r = EntityPrf(std::span<const Tags>(gold), std::span<const Tags>(gold));
  EXPECT_EQ(r.micro_f1, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.per_class.at("per").support, 1u);
}

TEST(EntityPrfTest, AllOutsidePrediction) {
  const std::vector<Tags> gold = {{"B-per", "I-per", "O", "O"}};
  const std::vector<Tags> pred = {{"O", "O", "O", "O"}};
  const MetricsReport r = EntityPrf(std::span<const Tags>(gold), std::span<const Tags>(pred));
  EXPECT_EQ(r.micro_f1, 0.0);
  EXPECT_EQ(r.per_class.at("per").recall, 0.0);
  EXPECT_EQ(r.per_class.at("per").precision, 0.0);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_FALSE(r.accuracy_definition.empty());
}

TEST(EntityPrfTest, MisalignedDocumentsAreErrors) {
  const std::vector<Tags> gold = {{"O", "O"}};
  const std::vector<Tags> shorter = {{"O"}};
  const std::vector<Tags> none = {};
  EXPECT_THROW(EntityPrf(std::span<const Tags>(gold), std::span<const Tags>(shorter)), DataError);
  EXPECT_THROW(EntityPrf(std::span<const Tags>(gold), std::span<const Tags>(none)), DataError);
}

TEST(EntityPrfTest, AgreesWithBruteForceOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n_types = 1 + rng.UniformInt(5);
    const size_t n_docs = 1 + rng.UniformInt(4);
    std::vector<Tags> gold, pred;
    for (size_t d = 0; d < n_docs; ++d) {
      const size_t len = rng.UniformInt(21);
      gold.push_back(testing::RandomTags(rng, len, n_types));
      pred.push_back(testing::RandomTags(rng, len, n_types));
    }
    const MetricsReport r = EntityPrf(std::span<const Tags>(gold), std::span<const Tags>(pred));
    const testing::OracleCounts oracle = testing::OracleEntityCounts(gold, pred);
    uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& [label, counts] : oracle.per_class) {
      const ClassScores& s = r.per_class.at(label);
      ASSERT_EQ(s.tp, counts[0]) << label;
      ASSERT_EQ(s.fp, counts[1]) << label;
      ASSERT_EQ(s.fn, counts[2]) << label;
      tp += counts[0];
      fp += counts[1];
      fn += counts[2];
    }
    ASSERT_EQ(r.tp, tp);
    ASSERT_EQ(r.fp, fp);
    ASSERT_EQ(r.fn, fn);
    const double micro = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    ASSERT_NEAR(r.micro_f1, micro, 1e-15);
    ASSERT_EQ(r.f1, r.micro_f1);
    const double acc =
        oracle.total == 0 ? 0.0 : static_cast<double>(oracle.correct) / oracle.total;
    ASSERT_NEAR(r.accuracy, acc, 1e-15);
    for (const auto& [label, s] : r.per_class) {
      for (double v : {s.precision, s.recall, s.f1}) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
    }
  }
}

TEST(EntityPrfTest, DocumentOverload) {
  const std::vector<ConllDocument> gold = {{{"a", "b"}, {"B-x", "O"}}};
  const std::vector<ConllDocument> pred = {{{"a", "b"}, {"B-x", "B-x"}}};
  const MetricsReport r = EntityPrf(gold, pred);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_NEAR(r.micro_f1, 2.0 / 3.0, 1e-15);
  const std::vector<ConllDocument> other_tokens = {{{"a", "c"}, {"B-x", "O"}}};
  EXPECT_THROW(EntityPrf(gold, other_tokens), DataError);
}

TEST(BinaryClsMetricsTest, Examples) {
  const std::vector<int32_t> gold = {1, 1, 1, 0, 0, 0};
  const std::vector<int32_t> pred = {1, 1, 0, 1, 0, 0};
  const MetricsReport r = BinaryClsMetrics(gold, pred);
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_NEAR(r.per_class.at("offensive").precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.per_class.at("offensive").recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.accuracy, 4.0 / 6.0, 1e-15);

  const MetricsReport same = BinaryClsMetrics(gold, gold);
  EXPECT_EQ(same.accuracy, 1.0);
  EXPECT_EQ(same.f1, 1.0);

  const std::vector<int32_t> negative(6, 0);
  const MetricsReport none = BinaryClsMetrics(gold, negative);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(none.per_class.at("offensive").precision, 0.0);
  EXPECT_EQ(none.accuracy, 0.5);
}

TEST(BinaryClsMetricsTest, InputErrors) {
  const std::vector<int32_t> empty;
  const std::vector<int32_t> one = {1};
  const std::vector<int32_t> two = {1, 0};
  EXPECT_THROW(BinaryClsMetrics(empty, empty), std::invalid_argument);
  EXPECT_THROW(BinaryClsMetrics(one, two), std::invalid_argument);
}

TEST(BinaryClsMetricsTest, JsonReport) {
  const std::vector<int32_t> gold = {1, 0, 1};
  const std::vector<int32_t> pred = {1, 0, 0};
  const nlohmann::json j = nlohmann::json::parse(MetricsReportToJson(BinaryClsMetrics(gold, pred)));
  EXPECT_NEAR(j["f1"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(j["per_class"]["offensive"]["support"], 2);
  EXPECT_TRUE(j.contains("accuracy_definition"));
}

TEST(ScoresTest, ZeroDenominators) {
  const ClassScores s = ScoresFromCounts(0, 0, 0);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  const ClassScores t = ScoresFromCounts(3, 1, 0);
  EXPECT_EQ(t.precision, 0.75);
  EXPECT_EQ(t.recall, 1.0);
  EXPECT_EQ(t.support, 3u);
}

TEST(LabeledTsvTest, ParseAndWrite) {
  std::istringstream in("offensive\tt'es nul\n0\tbonjour à tous\r\n\n1\ttab\tinside\n");
  const std::vector<LabeledTweet> data = ParseLabeledTsv(in);
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data[0], (LabeledTweet{"t'es nul", kOffensive}));
  EXPECT_EQ(data[1], (LabeledTweet{"bonjour à tous", kNotOffensive}));
  EXPECT_EQ(data[2].text, "tab\tinside");
  std::ostringstream out;
  WriteLabeledTsv(out, data);
  std::istringstream again(out.str());
  EXPECT_EQ(ParseLabeledTsv(again), data);
}

TEST(LabeledTsvTest, ErrorsNameTheLine) {
  for (const std::string bad : {"no tab here", "maybe\ttext", "1\t"}) {
    std::istringstream in("0\tok\n" + bad + "\n");
    try {
      ParseLabeledTsv(in);
      FAIL() << bad;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(SplitTest, LargestRemainderTrace) {
  // 7, 1.5, 1.5: floors (7,1,1), one item left, tie goes to the earlier part.
  EXPECT_EQ(LargestRemainderAllocation(10, {0.7, 0.15, 0.15}),
            (std::array<size_t, 3>{7, 2, 1}));
  EXPECT_EQ(LargestRemainderAllocation(0, {0.7, 0.15, 0.15}), (std::array<size_t, 3>{0, 0, 0}));
  EXPECT_EQ(LargestRemainderAllocation(3, {0.7, 0.15, 0.15}), (std::array<size_t, 3>{2, 1, 0}));
  // 3139.5, 672.75, 672.75: the two leftover items go to the .75 parts.
  EXPECT_EQ(LargestRemainderAllocation(4485, {0.7, 0.15, 0.15}),
            (std::array<size_t, 3>{3139, 673, 673}));
}

TEST(SplitTest, AllocationIsWithinOneItem) {
  for (size_t n = 0; n < 2000; ++n) {
    const std::array<double, 3> ratios = {0.7, 0.15, 0.15};
    const auto parts = LargestRemainderAllocation(n, ratios);
    ASSERT_EQ(parts[0] + parts[1] + parts[2], n);
    for (size_t k = 0; k < 3; ++k) {
      ASSERT_LT(std::abs(static_cast<double>(parts[k]) - ratios[k] * n), 1.0);
    }
  }
}

TEST(SplitTest, OneClassOfTen) {
  const std::vector<int32_t> labels(10, 0);
  const SplitIndices s = StratifiedSplit(labels, {0.7, 0.15, 0.15}, 4);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitTest, OffensiveDatasetSizes) {
  std::vector<int32_t> labels(5786, 0);
  std::fill(labels.begin(), labels.begin() + 1301, 1);
  Rng rng(5);
  rng.Shuffle(labels.begin(), labels.end());
  const SplitIndices s = StratifiedSplit(labels, {0.70, 0.15, 0.15}, 0);
  EXPECT_EQ(s.train.size(), 4050u);
  EXPECT_EQ(s.val.size(), 868u);
  EXPECT_EQ(s.test.size(), 868u);
  const std::array<const std::vector<size_t>*, 3> parts = {&s.train, &s.val, &s.test};
  const std::array<double, 3> ratios = {0.70, 0.15, 0.15};
  for (size_t k = 0; k < 3; ++k) {
    size_t pos = 0;
    for (size_t i : *parts[k]) pos += labels[i];
    EXPECT_LT(std::abs(static_cast<double>(pos) - ratios[k] * 1301), 1.0);
    EXPECT_LT(std::abs(static_cast<double>(parts[k]->size() - pos) - ratios[k] * 4485), 1.0);
  }
}

TEST(SplitTest, PartitionProperty) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n_classes = 1 + rng.UniformInt(4);
    std::vector<int32_t> labels;
    for (size_t c = 0; c < n_classes; ++c) {
      labels.insert(labels.end(), 3 + rng.UniformInt(60), static_cast<int32_t>(c));
    }
    rng.Shuffle(labels.begin(), labels.end());
    const SplitIndices s = StratifiedSplit(labels, {0.7, 0.15, 0.15}, trial);
    std::vector<size_t> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      ASSERT_TRUE(std::is_sorted(part->begin(), part->end()));
      all.insert(all.end(), part->begin(), part->end());
    }
    std::sort(all.begin(), all.end());
    std::vector<size_t> expected(labels.size());
    std::iota(expected.begin(), expected.end(), 0);
    ASSERT_EQ(all, expected);
  }
}

TEST(SplitTest, SeedDeterminism) {
  std::vector<int32_t> labels(200, 0);
  std::fill(labels.begin(), labels.begin() + 50, 1);
  const SplitIndices a = StratifiedSplit(labels, {0.7, 0.15, 0.15}, 8);
  const SplitIndices b = StratifiedSplit(labels, {0.7, 0.15, 0.15}, 8);
  const SplitIndices c = StratifiedSplit(labels, {0.7, 0.15, 0.15}, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.val, c.val);
}

TEST(SplitTest, Errors) {
  const std::vector<int32_t> tiny = {0, 0, 0, 1, 1};
  EXPECT_THROW(StratifiedSplit(tiny), std::invalid_argument);
  const std::vector<int32_t> ok(10, 0);
  EXPECT_THROW(StratifiedSplit(ok, {0.5, 0.2, 0.2}), std::invalid_argument);
  EXPECT_NO_THROW(StratifiedSplit(std::vector<int32_t>{0, 0, 0}));
}

TEST(SplitTest, Holdout) {
  const SplitIndices s = HoldoutSplit(100, 0.1, 3);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.train.size(), 90u);
  EXPECT_TRUE(s.test.empty());
  std::vector<size_t> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  EXPECT_EQ(all.back(), 99u);
  EXPECT_EQ(HoldoutSplit(5, 0.01, 3).val.size(), 1u);
}

}  // namespace
}  // namespace tweetlm
