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

// Helpers shared by the unit and acceptance tests: independent oracles and
// small fixtures.

#ifndef TWEETLM_TESTS_TEST_UTIL_H_
#define TWEETLM_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tweetlm/model.h"
#include "tweetlm/rng.h"
#include "tweetlm/tensor.h"

namespace tweetlm::testing {

// Every span [s, e) that is a maximal chunk under the conlleval repair rule,
// found by testing all O(n^2) candidates rather than scanning once.
inline std::set<std::tuple<std::string, size_t, size_t>> BruteForceChunks(
    const std::vector<std::string>& tags) {
  auto type_of = [](const std::string& tag) { return tag == "O" ? std::string() : tag.substr(2); };
  auto prefix = [](const std::string& tag) { return tag[0]; };
  std::set<std::tuple<std::string, size_t, size_t>> out;
  const size_t n = tags.size();
  for (size_t s = 0; s < n; ++s) {
    if (tags[s] == "O") continue;
    const std::string type = type_of(tags[s]);
    const bool opens = prefix(tags[s]) == 'B' || s == 0 || type_of(tags[s - 1]) != type;
    if (!opens) continue;
    for (size_t e = s + 1; e <= n; ++e) {
      bool inside = true;
      for (size_t k = s + 1; k < e; ++k) inside &= tags[k] == "I-" + type;
      if (!inside) break;
      const bool closes = e == n || tags[e] != "I-" + type;
      if (closes) out.emplace(type, s, e);
    }
  }
  return out;
}

struct OracleCounts {
  std::map<std::string, std::array<uint64_t, 3>> per_class;  // tp, fp, fn
  uint64_t correct = 0;
  uint64_t total = 0;
};

inline OracleCounts OracleEntityCounts(const std::vector<std::vector<std::string>>& gold,
                                       const std::vector<std::vector<std::string>>& pred) {
  OracleCounts c;
  for (size_t d = 0; d < gold.size(); ++d) {
    for (size_t i = 0; i < gold[d].size(); ++i) c.correct += gold[d][i] == pred[d][i];
    c.total += gold[d].size();
    const auto g = BruteForceChunks(gold[d]);
    const auto p = BruteForceChunks(pred[d]);
    for (const auto& span : p) ++c.per_class[std::get<0>(span)][g.count(span) ? 0 : 1];
    for (const auto& span : g) {
      if (!p.count(span)) ++c.per_class[std::get<0>(span)][2];
    }
  }
  return c;
}

// Random BIO sequence over `n_types` types (named T0..), including
// ill-formed I- tags.
inline std::vector<std::string> RandomTags(Rng& rng, size_t len, size_t n_types) {
  std::vector<std::string> tags;
  for (size_t i = 0; i < len; ++i) {
    const uint64_t r = rng.UniformInt(2 * n_types + 1);
    if (r == 0) {
      tags.emplace_back("O");
    } else {
      tags.push_back(std::string(r % 2 ? "B-" : "I-") + "T" + std::to_string((r - 1) / 2));
    }
  }
  return tags;
}

inline TransformerConfig GradCheckConfig() {
  TransformerConfig c;
  c.n_layers = 2;
  c.hidden_dim = 32;
  c.n_heads = 4;
  c.ffn_dim = 64;
  c.max_len = 16;
  c.vocab_size = 200;
  c.dropout_rate = 0.1;
  return c;
}

// Relative error between backprop through the model graph and central
// differences of the same loss, over every parameter tensor.
// Breakdown of a gradient check by gradient magnitude. Central differences
// of a loss near ln(V) carry roundoff of roughly ulp(L) / (2 eps), so
// coordinates whose true gradient is below `resolvable` cannot be checked to
// 1e-4 relative.
struct GradCheckDetail {
  double resolvable = 1e-6;
  double max_rel_resolvable = 0.0;
  size_t n_resolvable = 0;
  size_t n_small = 0;
  double max_abs_diff_small = 0.0;
  std::string worst;
};

inline double ModelGradCheck(ModelParams<double>& params,
                             const std::function<Var<double>(EncoderGraph<double>&)>& loss,
                             double eps = 1e-5, GradCheckDetail* detail = nullptr) {
  std::vector<Tensor<double>> analytic;
  for (const Tensor<double>& t : params.tensors.tensors()) analytic.emplace_back(t.shape());
  {
    Tape<double> tape;
    EncoderGraph<double> graph(tape, params);
    tape.Backward(loss(graph));
    AccumulateGrads(graph, analytic);
  }
  std::vector<Tensor<double>*> points;
  for (Tensor<double>& t : params.tensors.tensors()) points.push_back(&t);
  const GradCheckFn f = [&](Tape<double>& tape, std::span<const Var<double>>) {
    EncoderGraph<double> graph(tape, params, /*requires_grad=*/false);
    return loss(graph);
  };
  const auto numeric = NumericGradient(f, points, eps);
  if (detail != nullptr) {
    double worst = -1.0;
    for (size_t t = 0; t < analytic.size(); ++t) {
      for (size_t i = 0; i < analytic[t].size(); ++i) {
        const double a = analytic[t][i];
        const double n = numeric[t][i];
        const double scale = std::max(std::abs(a), std::abs(n));
        const double diff = std::abs(a - n);
        const double rel = diff / std::max(scale, 1e-8);
        if (scale >= detail->resolvable) {
          ++detail->n_resolvable;
          detail->max_rel_resolvable = std::max(detail->max_rel_resolvable, rel);
        } else {
          ++detail->n_small;
          detail->max_abs_diff_small = std::max(detail->max_abs_diff_small, diff);
        }
        if (rel > worst) {
          worst = rel;
          detail->worst = params.tensors.name(t);
        }
      }
    }
  }
  return MaxRelativeError(analytic, numeric);
}

}  // namespace tweetlm::testing

#endif  // TWEETLM_TESTS_TEST_UTIL_H_
