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

#include "tweetlm/evaluation.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "tweetlm/error.h"
#include "tweetlm/rng.h"
#include "tweetlm/utf8.h"

namespace tweetlm {
namespace {

std::string_view Chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// "B"/"I"/"O" and the entity type.
std::pair<char, std::string_view> SplitTag(std::string_view tag) {
  if (tag == "O") return {'O', {}};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return {tag[0], tag.substr(2)};
  }
  return {'?', {}};
}

double Ratio(uint64_t num, uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<LabeledTweet> ParseLabeledTsv(std::istream& in) {
  std::vector<LabeledTweet> out;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = Chomp(raw);
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("line " + std::to_string(line_no) + ": expected label<TAB>text");
    }
    const std::string_view label = line.substr(0, tab);
    LabeledTweet item;
    if (label == "offensive" || label == "1") {
      item.label = kOffensive;
    } else if (label == "not_offensive" || label == "0") {
      item.label = kNotOffensive;
    } else {
      throw DataError("line " + std::to_string(line_no) + ": unknown label '" +
                      std::string(label) + "'");
    }
    item.text = std::string(line.substr(tab + 1));
    if (item.text.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty text");
    }
    out.push_back(std::move(item));
  }
  return out;
}

void WriteLabeledTsv(std::ostream& out, std::span<const LabeledTweet> data) {
  for (const LabeledTweet& item : data) {
    out << (item.label == kOffensive ? "offensive" : "not_offensive") << '\t'
        << item.text << '\n';
  }
}

const std::vector<std::string>& CapEntityTypes() {
  static const std::vector<std::string> kTypes = {
      "person",  "musicArtist", "organisation", "geoLoc", "product",
      "transportLine", "media", "sportsTeam", "event", "tvShow",
      "movie",   "facility",    "other"};
  return kTypes;
}

std::vector<ConllDocument> ParseConll(std::istream& in,
                                      const std::vector<std::string>& entity_types) {
  const std::set<std::string, std::less<>> allowed(entity_types.begin(),
                                                   entity_types.end());
  std::vector<ConllDocument> docs;
  ConllDocument current;
  std::string raw;
  size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) docs.push_back(std::move(current));
    current = ConllDocument{};
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::vector<std::string_view> cols = SplitWhitespace(Chomp(raw));
    if (cols.empty()) {
      flush();
      continue;
    }
    if (cols.size() < 2) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected a token and a tag column");
    }
    const std::string_view tag = cols.back();
    const auto [prefix, type] = SplitTag(tag);
    if (prefix == '?' ||
        (prefix != 'O' && !allowed.empty() && !allowed.contains(type))) {
      throw DataError("line " + std::to_string(line_no) + ": invalid tag '" +
                      std::string(tag) + "'");
    }
    current.tokens.emplace_back(cols.front());
    current.tags.emplace_back(tag);
  }
  flush();
  return docs;
}

void WriteConll(std::ostream& out, std::span<const ConllDocument> docs) {
  for (size_t d = 0; d < docs.size(); ++d) {
    if (d) out << '\n';
    for (size_t i = 0; i < docs[d].tokens.size(); ++i) {
      out << docs[d].tokens[i] << ' ' << docs[d].tags[i] << '\n';
    }
  }
}

std::vector<EntitySpan> ExtractEntities(std::span<const std::string> tags) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close = [&](size_t end) {
    if (open) {
      open->end = end;
      spans.push_back(std::move(*open));
      open.reset();
    }
  };
  for (size_t i = 0; i < tags.size(); ++i) {
    const auto [prefix, type] = SplitTag(tags[i]);
    if (prefix == 'I' && open && open->label == type) continue;
    close(i);
    if (prefix == 'B' || prefix == 'I') {
      open = EntitySpan{std::string(type), i, i};
    }
  }
  close(tags.size());
  return spans;
}

std::vector<std::string> RenderBio(std::span<const EntitySpan> spans, size_t n) {
  std::vector<std::string> tags(n, "O");
  for (const EntitySpan& span : spans) {
    if (span.start >= span.end || span.end > n) {
      throw std::invalid_argument("entity span outside the token range");
    }
    tags[span.start] = "B-" + span.label;
    for (size_t i = span.start + 1; i < span.end; ++i) tags[i] = "I-" + span.label;
  }
  return tags;
}

ClassScores ScoresFromCounts(uint64_t tp, uint64_t fp, uint64_t fn) {
  ClassScores s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.support = tp + fn;
  s.precision = Ratio(tp, tp + fp);
  s.recall = Ratio(tp, tp + fn);
  s.f1 = Ratio(2 * tp, 2 * tp + fp + fn);
  return s;
}

MetricsReport EntityPrf(std::span<const std::vector<std::string>> gold_tags,
                        std::span<const std::vector<std::string>> pred_tags) {
  if (gold_tags.size() != pred_tags.size()) {
    throw DataError("gold has " + std::to_string(gold_tags.size()) +
                    " documents, prediction has " + std::to_string(pred_tags.size()));
  }
  struct Counts {
    uint64_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> counts;
  uint64_t correct_tags = 0;
  uint64_t total_tags = 0;
  for (size_t d = 0; d < gold_tags.size(); ++d) {
    const auto& g = gold_tags[d];
    const auto& p = pred_tags[d];
    if (g.size() != p.size()) {
      throw DataError("document " + std::to_string(d) + ": gold has " +
                      std::to_string(g.size()) + " tokens, prediction has " +
                      std::to_string(p.size()));
    }
    for (size_t i = 0; i < g.size(); ++i) correct_tags += g[i] == p[i];
    total_tags += g.size();

    const std::vector<EntitySpan> gold_spans = ExtractEntities(g);
    const std::vector<EntitySpan> pred_spans = ExtractEntities(p);
    const std::set<EntitySpan> gold_set(gold_spans.begin(), gold_spans.end());
    const std::set<EntitySpan> pred_set(pred_spans.begin(), pred_spans.end());
    for (const EntitySpan& s : pred_set) {
      if (gold_set.contains(s)) {
        ++counts[s.label].tp;
      } else {
        ++counts[s.label].fp;
      }
    }
    for (const EntitySpan& s : gold_set) {
      if (!pred_set.contains(s)) ++counts[s.label].fn;
    }
  }
  MetricsReport report;
  report.accuracy_definition = "token-level tag accuracy including O";
  report.accuracy = Ratio(correct_tags, total_tags);
  for (const auto& [label, c] : counts) {
    report.per_class[label] = ScoresFromCounts(c.tp, c.fp, c.fn);
    report.tp += c.tp;
    report.fp += c.fp;
    report.fn += c.fn;
  }
  report.micro_f1 = ScoresFromCounts(report.tp, report.fp, report.fn).f1;
  report.f1 = report.micro_f1;
  return report;
}

MetricsReport EntityPrf(std::span<const ConllDocument> gold,
                        std::span<const ConllDocument> pred) {
  std::vector<std::vector<std::string>> g, p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (const auto& doc : gold) g.push_back(doc.tags);
  for (const auto& doc : pred) p.push_back(doc.tags);
  for (size_t d = 0; d < std::min(gold.size(), pred.size()); ++d) {
    if (gold[d].tokens != pred[d].tokens) {
      throw DataError("document " + std::to_string(d) + ": gold and prediction tokens differ");
    }
  }
  return EntityPrf(std::span<const std::vector<std::string>>(g),
                   std::span<const std::vector<std::string>>(p));
}

MetricsReport BinaryClsMetrics(std::span<const int32_t> gold,
                               std::span<const int32_t> pred) {
  if (gold.empty()) throw std::invalid_argument("binary metrics need at least one item");
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("gold and prediction lengths differ");
  }
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == kOffensive;
    const bool p = pred[i] == kOffensive;
    tp += g && p;
    fp += !g && p;
    fn += g && !p;
    tn += !g && !p;
  }
  MetricsReport report;
  report.accuracy_definition = "exact-match rate";
  report.accuracy = Ratio(tp + tn, gold.size());
  report.per_class["offensive"] = ScoresFromCounts(tp, fp, fn);
  report.per_class["not_offensive"] = ScoresFromCounts(tn, fn, fp);
  report.tp = tp;
  report.fp = fp;
  report.fn = fn;
  report.f1 = report.per_class["offensive"].f1;
  // Pooled over both classes, which for single-label data equals accuracy.
  report.micro_f1 = ScoresFromCounts(tp + tn, fp + fn, fn + fp).f1;
  return report;
}

std::string MetricsReportToJson(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  doc["accuracy"] = report.accuracy;
  doc["accuracy_definition"] = report.accuracy_definition;
  doc["f1"] = report.f1;
  doc["micro_f1"] = report.micro_f1;
  doc["tp"] = report.tp;
  doc["fp"] = report.fp;
  doc["fn"] = report.fn;
  auto& classes = doc["per_class"];
  classes = nlohmann::ordered_json::object();
  for (const auto& [label, s] : report.per_class) {
    classes[label] = {{"precision", s.precision},
                      {"recall", s.recall},
                      {"f1", s.f1},
                      {"support", s.support}};
  }
  return doc.dump(2);
}

std::array<size_t, 3> LargestRemainderAllocation(size_t n,
                                                 const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw std::invalid_argument("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  std::array<size_t, 3> counts{};
  std::array<double, 3> remainders{};
  size_t assigned = 0;
  for (size_t i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * ratios[i];
    counts[i] = static_cast<size_t>(std::floor(quota + 1e-9));
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainders[a] > remainders[b] + 1e-9;
  });
  for (size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

SplitIndices StratifiedSplit(std::span<const int32_t> labels,
                             const std::array<double, 3>& ratios, uint64_t seed) {
  std::map<int32_t, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  SplitIndices out;
  for (auto& [label, members] : by_class) {
    if (members.size() < 3) {
      throw std::invalid_argument("class " + std::to_string(label) + " has " +
                                  std::to_string(members.size()) +
                                  " members; stratified split needs at least 3");
    }
    Rng rng(MixSeed(DeriveSeed(seed, "stratified_split"),
                    static_cast<uint64_t>(static_cast<int64_t>(label))));
    rng.Shuffle(members.begin(), members.end());
    const auto counts = LargestRemainderAllocation(members.size(), ratios);
    auto it = members.begin();
    for (auto [dst, count] : {std::pair{&out.train, counts[0]},
                              std::pair{&out.val, counts[1]},
                              std::pair{&out.test, counts[2]}}) {
      dst->insert(dst->end(), it, it + static_cast<std::ptrdiff_t>(count));
      it += static_cast<std::ptrdiff_t>(count);
    }
  }
  for (auto* part : {&out.train, &out.val, &out.test}) std::sort(part->begin(), part->end());
  return out;
}

SplitIndices HoldoutSplit(size_t n, double fraction, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("hold-out split needs at least 2 items");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("hold-out fraction must be in (0, 1)");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, "holdout_split"));
  rng.Shuffle(order.begin(), order.end());
  const size_t n_val = std::clamp<size_t>(
      static_cast<size_t>(std::llround(static_cast<double>(n) * fraction)), 1, n - 1);
  SplitIndices out;
  out.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

}  // namespace tweetlm
