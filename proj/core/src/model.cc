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

#include "tweetlm/model.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tweetlm/rng.h"

namespace tweetlm {
namespace {

constexpr double kInitStddev = 0.02;
// Standard deviation of a unit normal truncated to [-2, 2]. Dividing by it
// makes the truncated draws themselves have standard deviation kInitStddev.
constexpr double kTruncatedUnitStddev = 0.87962566103423978;

std::string LayerPrefix(size_t layer) {
  return "layer." + std::to_string(layer) + ".";
}

bool IsGain(std::string_view name) { return name.ends_with(".gain"); }
bool IsBias(std::string_view name) { return name.ends_with(".bias"); }

void CheckIds(std::span<const int32_t> ids, const TransformerConfig& config) {
  if (ids.empty()) throw std::invalid_argument("encoder input is empty");
  if (ids.size() > config.max_len) {
    throw std::invalid_argument("input of " + std::to_string(ids.size()) +
                                " tokens exceeds max_len " +
                                std::to_string(config.max_len));
  }
}

}  // namespace

TransformerConfig TransformerConfig::Base() {
  TransformerConfig c;
  c.n_layers = 12;
  c.hidden_dim = 768;
  c.n_heads = 12;
  c.ffn_dim = 3072;
  c.max_len = 512;
  c.vocab_size = 32005;
  return c;
}

TransformerConfig TransformerConfig::Toy() { return TransformerConfig{}; }

void TransformerConfig::Validate() const {
  if (hidden_dim == 0 || n_heads == 0 || hidden_dim % n_heads != 0) {
    throw std::invalid_argument("hidden_dim must be a positive multiple of n_heads");
  }
  if (ffn_dim == 0) throw std::invalid_argument("ffn_dim must be positive");
  if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");
  if (vocab_size <= static_cast<size_t>(kNumSpecials)) {
    throw std::invalid_argument("vocab_size must exceed the special tokens");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout_rate must be in [0, 1)");
  }
  if (!(layer_norm_eps > 0.0)) {
    throw std::invalid_argument("layer_norm_eps must be positive");
  }
}

// --- ParamStore --------------------------------------------------------------

template <typename T>
void ParamStore<T>::Add(std::string name, Tensor<T> tensor) {
  if (index_.contains(name)) {
    throw std::invalid_argument("duplicate parameter " + name);
  }
  index_.emplace(name, names_.size());
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(tensor));
}

template <typename T>
void ParamStore<T>::RemovePrefix(std::string_view prefix) {
  ParamStore<T> kept;
  for (size_t i = 0; i < size(); ++i) {
    if (!std::string_view(names_[i]).starts_with(prefix)) {
      kept.Add(std::move(names_[i]), std::move(tensors_[i]));
    }
  }
  *this = std::move(kept);
}

template <typename T>
bool ParamStore<T>::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

template <typename T>
size_t ParamStore<T>::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw std::out_of_range("no parameter named " + std::string(name));
  }
  return it->second;
}

template <typename T>
uint64_t ParamStore<T>::NumElements() const {
  uint64_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

// --- Layout and counting -------------------------------------------------------

std::vector<ParamSpec> ParamLayout(const TransformerConfig& config,
                                   const TaskHead& head) {
  config.Validate();
  const size_t h = config.hidden_dim;
  const size_t f = config.ffn_dim;
  const size_t v = config.vocab_size;
  std::vector<ParamSpec> out = {
      {"embeddings.token", {v, h}},
      {"embeddings.position", {config.max_len, h}},
      {"embeddings.norm.gain", {h}},
      {"embeddings.norm.bias", {h}},
  };
  for (size_t l = 0; l < config.n_layers; ++l) {
    const std::string p = LayerPrefix(l);
    for (const char* proj : {"query", "key", "value", "output"}) {
      out.push_back({p + "attention." + proj + ".weight", {h, h}});
      out.push_back({p + "attention." + proj + ".bias", {h}});
    }
    out.push_back({p + "attention.norm.gain", {h}});
    out.push_back({p + "attention.norm.bias", {h}});
    out.push_back({p + "ffn.in.weight", {h, f}});
    out.push_back({p + "ffn.in.bias", {f}});
    out.push_back({p + "ffn.out.weight", {f, h}});
    out.push_back({p + "ffn.out.bias", {h}});
    out.push_back({p + "ffn.norm.gain", {h}});
    out.push_back({p + "ffn.norm.bias", {h}});
  }
  out.push_back({"mlm.dense.weight", {h, h}});
  out.push_back({"mlm.dense.bias", {h}});
  out.push_back({"mlm.norm.gain", {h}});
  out.push_back({"mlm.norm.bias", {h}});
  out.push_back({"mlm.output.bias", {v}});

  if (head.kind != HeadKind::kNone) {
    if (head.n_classes < 2) throw std::invalid_argument("task head needs n_classes >= 2");
    if (head.kind == HeadKind::kSequenceCls) {
      out.push_back({"head.pooler.weight", {h, h}});
      out.push_back({"head.pooler.bias", {h}});
    }
    out.push_back({"head.classifier.weight", {h, head.n_classes}});
    out.push_back({"head.classifier.bias", {head.n_classes}});
  }
  return out;
}

uint64_t ParamCount(const TransformerConfig& config) {
  config.Validate();
  const uint64_t h = config.hidden_dim;
  const uint64_t f = config.ffn_dim;
  const uint64_t embeddings = (config.vocab_size + config.max_len) * h + 2 * h;
  const uint64_t attention = 4 * (h * h + h) + 2 * h;
  const uint64_t ffn = (h * f + f) + (f * h + h) + 2 * h;
  return embeddings + config.n_layers * (attention + ffn);
}

uint64_t MlmHeadParamCount(const TransformerConfig& config) {
  config.Validate();
  const uint64_t h = config.hidden_dim;
  return h * h + h + 2 * h + config.vocab_size;
}

uint64_t TaskHeadParamCount(const TransformerConfig& config, const TaskHead& head) {
  const uint64_t h = config.hidden_dim;
  const uint64_t n = head.n_classes;
  switch (head.kind) {
    case HeadKind::kNone:
      return 0;
    case HeadKind::kSequenceCls:
      return h * h + h + h * n + n;
    case HeadKind::kTokenCls:
      return h * n + n;
  }
  return 0;
}

bool TakesWeightDecay(std::string_view name) {
  return !IsBias(name) && !IsGain(name);
}

template <typename T>
static Tensor<T> InitTensor(const ParamSpec& spec, Rng& rng) {
  if (IsGain(spec.name)) return Tensor<T>(spec.shape, T(1));
  if (IsBias(spec.name)) return Tensor<T>(spec.shape, T(0));
  Tensor<T> t(spec.shape);
  for (T& x : t.data()) x = static_cast<T>(rng.TruncatedNormal(kInitStddev / kTruncatedUnitStddev));
  return t;
}

template <typename T>
ModelParams<T> InitParams(const TransformerConfig& config, uint64_t seed) {
  ModelParams<T> params;
  params.config = config;
  Rng rng(DeriveSeed(seed, "init"));
  for (const ParamSpec& spec : ParamLayout(config)) {
    params.tensors.Add(spec.name, InitTensor<T>(spec, rng));
  }
  return params;
}

template <typename T>
void AttachHead(ModelParams<T>& params, const TaskHead& head, uint64_t seed) {
  if (head.kind == HeadKind::kNone) throw std::invalid_argument("cannot attach an empty head");
  params.tensors.RemovePrefix("head.");
  Rng rng(DeriveSeed(seed, "head"));
  for (const ParamSpec& spec : ParamLayout(params.config, head)) {
    if (std::string_view(spec.name).starts_with("head.")) {
      params.tensors.Add(spec.name, InitTensor<T>(spec, rng));
    }
  }
  params.head = head;
}

// --- EncoderGraph ------------------------------------------------------------

template <typename T>
EncoderGraph<T>::EncoderGraph(Tape<T>& tape, const ModelParams<T>& params,
                              bool requires_grad)
    : tape_(tape), params_(params) {
  vars_.reserve(params.tensors.size());
  for (const Tensor<T>& t : params.tensors.tensors()) {
    vars_.push_back(tape.Parameter(t, requires_grad));
  }
}

template <typename T>
Var<T> EncoderGraph<T>::param(std::string_view name) const {
  return vars_[params_.tensors.index(name)];
}

template <typename T>
Var<T> EncoderGraph<T>::Encode(std::span<const int32_t> ids,
                               const ForwardOptions& options) {
  const TransformerConfig& c = params_.config;
  CheckIds(ids, c);
  const size_t n = ids.size();
  const size_t head_dim = c.hidden_dim / c.n_heads;
  const T eps = static_cast<T>(c.layer_norm_eps);
  const double rate = options.train ? c.dropout_rate : 0.0;
  Rng rng(options.dropout_seed);
  attention_.clear();

  std::vector<int32_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  Var<T> x = Add(GatherRows(param("embeddings.token"), ids),
                 GatherRows(param("embeddings.position"),
                            std::span<const int32_t>(positions)));
  x = LayerNorm(x, param("embeddings.norm.gain"), param("embeddings.norm.bias"), eps);
  x = Dropout(x, rate, rng);

  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  for (size_t l = 0; l < c.n_layers; ++l) {
    const std::string p = LayerPrefix(l);
    auto dense = [&](Var<T> in, const std::string& name) {
      return AddBias(MatMul(in, param(name + ".weight")), param(name + ".bias"));
    };
    const Var<T> q = dense(x, p + "attention.query");
    const Var<T> k = dense(x, p + "attention.key");
    const Var<T> v = dense(x, p + "attention.value");
    std::vector<Var<T>> heads;
    heads.reserve(c.n_heads);
    for (size_t hd = 0; hd < c.n_heads; ++hd) {
      const size_t start = hd * head_dim;
      const Var<T> scores = Scale(MatMulTransB(SliceCols(q, start, head_dim),
                                               SliceCols(k, start, head_dim)),
                                  scale);
      Var<T> probs = Softmax(scores, 1);
      if (options.capture_attention) attention_.push_back(probs.value());
      probs = Dropout(probs, rate, rng);
      heads.push_back(MatMul(probs, SliceCols(v, start, head_dim)));
    }
    const Var<T> context = dense(ConcatCols(std::span<const Var<T>>(heads)),
                                 p + "attention.output");
    x = LayerNorm(Add(x, context), param(p + "attention.norm.gain"),
                  param(p + "attention.norm.bias"), eps);

    Var<T> ff = Dropout(Gelu(dense(x, p + "ffn.in")), rate, rng);
    ff = dense(ff, p + "ffn.out");
    x = LayerNorm(Add(x, ff), param(p + "ffn.norm.gain"), param(p + "ffn.norm.bias"), eps);
  }
  return x;
}

template <typename T>
Var<T> EncoderGraph<T>::MlmLogits(Var<T> hidden, std::span<const int32_t> rows) {
  const T eps = static_cast<T>(params_.config.layer_norm_eps);
  Var<T> h = GatherRows(hidden, rows);
  h = Gelu(AddBias(MatMul(h, param("mlm.dense.weight")), param("mlm.dense.bias")));
  h = LayerNorm(h, param("mlm.norm.gain"), param("mlm.norm.bias"), eps);
  return AddBias(MatMulTransB(h, param("embeddings.token")), param("mlm.output.bias"));
}

template <typename T>
Var<T> EncoderGraph<T>::SequenceLogits(Var<T> hidden) {
  if (params_.head.kind != HeadKind::kSequenceCls) {
    throw std::invalid_argument("model has no sequence classification head");
  }
  const int32_t first[] = {0};
  Var<T> pooled = GatherRows(hidden, std::span<const int32_t>(first));
  pooled = Tanh(AddBias(MatMul(pooled, param("head.pooler.weight")),
                        param("head.pooler.bias")));
  return AddBias(MatMul(pooled, param("head.classifier.weight")),
                 param("head.classifier.bias"));
}

template <typename T>
Var<T> EncoderGraph<T>::TokenLogits(Var<T> hidden,
                                    std::span<const int32_t> word_positions) {
  if (params_.head.kind != HeadKind::kTokenCls) {
    throw std::invalid_argument("model has no token classification head");
  }
  if (word_positions.empty()) {
    throw std::invalid_argument("token classification input has no words");
  }
  const Var<T> rows = GatherRows(hidden, word_positions);
  return AddBias(MatMul(rows, param("head.classifier.weight")),
                 param("head.classifier.bias"));
}

template <typename T>
void AccumulateGrads(const EncoderGraph<T>& graph, std::vector<Tensor<T>>& acc) {
  const Tape<T>& tape = *graph.param(size_t{0}).tape;
  for (size_t i = 0; i < graph.num_params(); ++i) {
    const Tensor<T>* g = tape.FindGrad(graph.param(i));
    if (g == nullptr) continue;
    auto dst = acc[i].data();
    auto src = g->data();
    for (size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
  }
}

std::vector<int32_t> WordPositions(std::span<const uint8_t> word_start) {
  std::vector<int32_t> out;
  for (size_t i = 0; i < word_start.size(); ++i) {
    if (word_start[i]) out.push_back(static_cast<int32_t>(i));
  }
  return out;
}

EncodedSequence MakeModelInput(const EncodedSequence& text, size_t max_len) {
  if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");
  const size_t keep = std::min(text.ids.size(), max_len - 2);
  EncodedSequence out;
  out.ids.reserve(keep + 2);
  out.word_start.reserve(keep + 2);
  out.ids.push_back(kBosId);
  out.word_start.push_back(0);
  out.ids.insert(out.ids.end(), text.ids.begin(), text.ids.begin() + keep);
  out.word_start.insert(out.word_start.end(), text.word_start.begin(),
                        text.word_start.begin() + keep);
  out.ids.push_back(kEosId);
  out.word_start.push_back(0);
  return out;
}

template <typename T>
Var<T> MlmLoss(EncoderGraph<T>& graph, const MaskedExample& example,
               const ForwardOptions& options) {
  if (example.selected_positions.empty()) {
    throw std::invalid_argument("masked example has no selected positions");
  }
  const std::span<const int32_t> ids(example.input_ids.data(), example.attention_len);
  const Var<T> hidden = graph.Encode(ids, options);
  std::vector<int32_t> rows;
  std::vector<int32_t> labels;
  for (uint32_t pos : example.selected_positions) {
    rows.push_back(static_cast<int32_t>(pos));
    labels.push_back(example.labels[pos]);
  }
  return CrossEntropyMasked(graph.MlmLogits(hidden, rows),
                            std::span<const int32_t>(labels));
}

template <typename T>
Var<T> SequenceClsLoss(EncoderGraph<T>& graph, const EncodedSequence& input,
                       int32_t label, const ForwardOptions& options) {
  const Var<T> hidden = graph.Encode(input.ids, options);
  const int32_t labels[] = {label};
  return CrossEntropyMasked(graph.SequenceLogits(hidden),
                            std::span<const int32_t>(labels));
}

template <typename T>
Var<T> TokenClsLoss(EncoderGraph<T>& graph, const EncodedSequence& input,
                    std::span<const int32_t> word_labels,
                    const ForwardOptions& options) {
  const std::vector<int32_t> words = WordPositions(input.word_start);
  if (words.size() != word_labels.size()) {
    throw std::invalid_argument(std::to_string(word_labels.size()) +
                                " word labels for " + std::to_string(words.size()) +
                                " words");
  }
  const Var<T> hidden = graph.Encode(input.ids, options);
  return CrossEntropyMasked(graph.TokenLogits(hidden, words), word_labels);
}

template <typename T>
Tensor<T> ForwardEncoder(const ModelParams<T>& params, const SequenceBlock& block) {
  if (block.attention_len > params.config.max_len) {
    throw std::invalid_argument("block attention_len exceeds model max_len");
  }
  Tape<T> tape;
  EncoderGraph<T> graph(tape, params, false);
  return graph
      .Encode(std::span<const int32_t>(block.ids.data(), block.attention_len))
      .value();
}

template <typename T>
T MlmLossValue(const ModelParams<T>& params, const MaskedExample& example) {
  Tape<T> tape;
  EncoderGraph<T> graph(tape, params, false);
  return MlmLoss(graph, example).value()[0];
}

template <typename T>
Tensor<T> SequenceClsForward(const ModelParams<T>& params,
                             const EncodedSequence& input) {
  Tape<T> tape;
  EncoderGraph<T> graph(tape, params, false);
  const Tensor<T>& logits = graph.SequenceLogits(graph.Encode(input.ids)).value();
  return Tensor<T>({logits.size()}, logits.vec());
}

template <typename T>
Tensor<T> TokenClsForward(const ModelParams<T>& params, const EncodedSequence& input) {
  Tape<T> tape;
  EncoderGraph<T> graph(tape, params, false);
  const std::vector<int32_t> words = WordPositions(input.word_start);
  return graph.TokenLogits(graph.Encode(input.ids), words).value();
}

#define TWEETLM_INSTANTIATE(T)                                                   \
  template class ParamStore<T>;                                                  \
  template class EncoderGraph<T>;                                                \
  template ModelParams<T> InitParams<T>(const TransformerConfig&, uint64_t);     \
  template void AttachHead(ModelParams<T>&, const TaskHead&, uint64_t);          \
  template void AccumulateGrads(const EncoderGraph<T>&, std::vector<Tensor<T>>&); \
  template Var<T> MlmLoss(EncoderGraph<T>&, const MaskedExample&,                \
                          const ForwardOptions&);                                \
  template Var<T> SequenceClsLoss(EncoderGraph<T>&, const EncodedSequence&,      \
                                  int32_t, const ForwardOptions&);               \
  template Var<T> TokenClsLoss(EncoderGraph<T>&, const EncodedSequence&,         \
                               std::span<const int32_t>, const ForwardOptions&); \
  template Tensor<T> ForwardEncoder(const ModelParams<T>&, const SequenceBlock&); \
  template T MlmLossValue(const ModelParams<T>&, const MaskedExample&);          \
  template Tensor<T> SequenceClsForward(const ModelParams<T>&,                   \
                                        const EncodedSequence&);                 \
  template Tensor<T> TokenClsForward(const ModelParams<T>&, const EncodedSequence&);

TWEETLM_INSTANTIATE(float)
TWEETLM_INSTANTIATE(double)

#undef TWEETLM_INSTANTIATE

}  // namespace tweetlm
