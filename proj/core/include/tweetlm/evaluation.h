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

#ifndef TWEETLM_EVALUATION_H_
#define TWEETLM_EVALUATION_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tweetlm {

inline constexpr int32_t kNotOffensive = 0;
inline constexpr int32_t kOffensive = 1;

struct LabeledTweet {
  std::string text;
  int32_t label = kNotOffensive;

  bool operator==(const LabeledTweet&) const = default;
};

// "label<TAB>text" per line. Labels are "offensive"/"not_offensive" or 1/0.
// Throws DataError with the line number on a malformed line.
std::vector<LabeledTweet> ParseLabeledTsv(std::istream& in);
void WriteLabeledTsv(std::ostream& out, std::span<const LabeledTweet> data);

struct ConllDocument {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  bool operator==(const ConllDocument&) const = default;
};

// The 13 entity types of the French tweet NER benchmark.
const std::vector<std::string>& CapEntityTypes();

// Token per line, tag in the last whitespace-separated column, blank lines
// between documents. Tags must be "O" or B-/I- followed by a type from
// `entity_types` (any type when the list is empty). Throws DataError with
// the line number otherwise.
std::vector<ConllDocument> ParseConll(
    std::istream& in,
    const std::vector<std::string>& entity_types = CapEntityTypes());
void WriteConll(std::ostream& out, std::span<const ConllDocument> docs);

struct EntitySpan {
  std::string label;
  size_t start = 0;  // inclusive token index
  size_t end = 0;    // exclusive

  auto operator<=>(const EntitySpan&) const = default;
};

// Maximal BIO chunks. An I-X whose predecessor is O, the sequence start or
// a different type opens a new chunk (the conlleval repair rule).
std::vector<EntitySpan> ExtractEntities(std::span<const std::string> tags);

// Canonical BIO rendering of non-overlapping spans over n tokens.
std::vector<std::string> RenderBio(std::span<const EntitySpan> spans, size_t n);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  uint64_t support = 0;  // gold count
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
};

// Any ratio whose denominator is zero is reported as 0.
struct MetricsReport {
  double accuracy = 0.0;
  std::map<std::string, ClassScores> per_class;
  double micro_f1 = 0.0;
  // Headline F1: positive-class F1 for binary classification, micro-F1 for
  // entity scoring.
  double f1 = 0.0;
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
  std::string accuracy_definition;
};

// P/R/F1 from raw counts under the zero-denominator convention.
ClassScores ScoresFromCounts(uint64_t tp, uint64_t fp, uint64_t fn);

// Exact-match entity scoring: a predicted (label, start, end) is a true
// positive iff the same span exists in gold. Accuracy is token-level tag
// accuracy including O. Throws DataError if documents are misaligned.
MetricsReport EntityPrf(std::span<const ConllDocument> gold,
                        std::span<const ConllDocument> pred);
MetricsReport EntityPrf(std::span<const std::vector<std::string>> gold_tags,
                        std::span<const std::vector<std::string>> pred_tags);

// Accuracy plus P/R/F1 for both classes; f1 is the offensive-class F1.
// Throws std::invalid_argument for empty or unequal-length inputs.
MetricsReport BinaryClsMetrics(std::span<const int32_t> gold,
                               std::span<const int32_t> pred);

std::string MetricsReportToJson(const MetricsReport& report);

struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> val;
  std::vector<size_t> test;
};

// Splits n items into integer parts proportional to `ratios`: floors first,
// then the leftover items go to the largest fractional remainders, ties to
// the earlier part.
std::array<size_t, 3> LargestRemainderAllocation(size_t n,
                                                 const std::array<double, 3>& ratios);

// Per class: seeded shuffle, then largest-remainder allocation into
// train/val/test. Index lists are returned sorted. Throws
// std::invalid_argument if the ratios do not sum to 1 or any class has
// fewer than 3 members.
SplitIndices StratifiedSplit(std::span<const int32_t> labels,
                             const std::array<double, 3>& ratios = {0.70, 0.15, 0.15},
                             uint64_t seed = 0);

// Seeded random hold-out of round(n * fraction) items (at least one) into
// `val`; the rest go to `train`. `test` is left empty.
SplitIndices HoldoutSplit(size_t n, double fraction, uint64_t seed);

}  // namespace tweetlm

#endif  // TWEETLM_EVALUATION_H_
