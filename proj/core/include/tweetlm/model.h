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

#ifndef TWEETLM_MODEL_H_
#define TWEETLM_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tweetlm/blocks.h"
#include "tweetlm/tensor.h"
#include "tweetlm/tokenizer.h"

namespace tweetlm {

struct TransformerConfig {
  size_t n_layers = 2;
  size_t hidden_dim = 64;
  size_t n_heads = 4;
  size_t ffn_dim = 256;
  size_t max_len = 128;
  size_t vocab_size = 1000;
  double dropout_rate = 0.1;
  double layer_norm_eps = 1e-5;

  // 12 layers, 768 hidden, 12 heads, 3072 ffn, 32005 vocab (32k + specials
  // headroom), 512 positions.
  static TransformerConfig Base();
  // 2 layers, 64 hidden, 4 heads, 256 ffn, 1000 vocab, 128 positions.
  static TransformerConfig Toy();

  // Throws std::invalid_argument naming the violated constraint.
  void Validate() const;

  bool operator==(const TransformerConfig&) const = default;
};

enum class HeadKind : uint8_t { kNone = 0, kSequenceCls = 1, kTokenCls = 2 };

struct TaskHead {
  HeadKind kind = HeadKind::kNone;
  size_t n_classes = 0;

  bool operator==(const TaskHead&) const = default;
};

// Named tensors in insertion order.
template <typename T>
class ParamStore {
 public:
  void Add(std::string name, Tensor<T> tensor);
  // Drops every tensor whose name starts with `prefix`.
  void RemovePrefix(std::string_view prefix);

  size_t size() const { return tensors_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  Tensor<T>& tensor(size_t i) { return tensors_[i]; }
  const Tensor<T>& tensor(size_t i) const { return tensors_[i]; }
  std::vector<Tensor<T>>& tensors() { return tensors_; }
  const std::vector<Tensor<T>>& tensors() const { return tensors_; }

  bool contains(std::string_view name) const;
  size_t index(std::string_view name) const;
  Tensor<T>& at(std::string_view name) { return tensors_[index(name)]; }
  const Tensor<T>& at(std::string_view name) const { return tensors_[index(name)]; }

  uint64_t NumElements() const;

  template <typename U>
  ParamStore<U> Cast() const {
    ParamStore<U> out;
    for (size_t i = 0; i < size(); ++i) out.Add(names_[i], tensors_[i].template Cast<U>());
    return out;
  }

  bool operator==(const ParamStore&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor<T>> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

template <typename T>
struct ModelParams {
  TransformerConfig config;
  TaskHead head;
  ParamStore<T> tensors;

  template <typename U>
  ModelParams<U> Cast() const {
    return ModelParams<U>{config, head, tensors.template Cast<U>()};
  }

  bool operator==(const ModelParams&) const = default;
};

struct ParamSpec {
  std::string name;
  std::vector<size_t> shape;
};

// Every tensor of the backbone, the MLM head and (if any) the task head, in
// storage order.
std::vector<ParamSpec> ParamLayout(const TransformerConfig& config,
                                   const TaskHead& head = {});

// Scalar parameters of the encoder backbone: token and position embeddings,
// the embedding layer norm and every transformer layer. Excludes the MLM
// head and task heads.
uint64_t ParamCount(const TransformerConfig& config);
// Dense + layer norm + output bias; the output projection is tied to the
// token embeddings.
uint64_t MlmHeadParamCount(const TransformerConfig& config);
uint64_t TaskHeadParamCount(const TransformerConfig& config, const TaskHead& head);

// Weight matrices and embeddings: normal draws truncated at two standard
// deviations, scaled so the truncated values have standard deviation 0.02;
// biases zero; layer-norm gains one.
template <typename T>
ModelParams<T> InitParams(const TransformerConfig& config, uint64_t seed);

// Replaces any existing task head. Throws std::invalid_argument if
// head.n_classes < 2 or head.kind is kNone.
template <typename T>
void AttachHead(ModelParams<T>& params, const TaskHead& head, uint64_t seed);

// True for tensors that take decoupled weight decay (not biases, not layer
// norms).
bool TakesWeightDecay(std::string_view name);

struct ForwardOptions {
  bool train = false;
  uint64_t dropout_seed = 0;
  bool capture_attention = false;
};

// Binds a model's parameters onto a tape and builds its forward graph.
template <typename T>
class EncoderGraph {
 public:
  EncoderGraph(Tape<T>& tape, const ModelParams<T>& params,
               bool requires_grad = true);

  // Hidden states [ids.size(), hidden] for the non-pad prefix `ids`. Running
  // only over the prefix is what masks PAD: padded positions neither attend
  // nor are attended to. Throws std::invalid_argument if ids is empty or
  // longer than max_len, std::out_of_range for ids outside the vocabulary.
  Var<T> Encode(std::span<const int32_t> ids, const ForwardOptions& options = {});

  // MLM logits [rows, vocab] for the given rows of `hidden`.
  Var<T> MlmLogits(Var<T> hidden, std::span<const int32_t> rows);
  // tanh(h_0 W_p + b_p) W_c + b_c, shape [1, n_classes].
  Var<T> SequenceLogits(Var<T> hidden);
  // Classifier rows at word positions, shape [n_words, n_classes].
  Var<T> TokenLogits(Var<T> hidden, std::span<const int32_t> word_positions);

  Var<T> param(size_t i) const { return vars_[i]; }
  size_t num_params() const { return vars_.size(); }
  Var<T> param(std::string_view name) const;

  // Attention probabilities [n, n] per layer and head, layer-major, filled
  // by Encode when capture_attention is set.
  const std::vector<Tensor<T>>& attention() const { return attention_; }

  const ModelParams<T>& params() const { return params_; }

 private:
  Tape<T>& tape_;
  const ModelParams<T>& params_;
  std::vector<Var<T>> vars_;
  std::vector<Tensor<T>> attention_;
};

// Adds every parameter gradient reached on the graph's tape into `acc`
// (which must mirror params.tensors).
template <typename T>
void AccumulateGrads(const EncoderGraph<T>& graph, std::vector<Tensor<T>>& acc);

// Positions with word_start set, in order. <s>, </s> and <pad> never carry
// the flag, so these are exactly the first subwords of the input words.
std::vector<int32_t> WordPositions(std::span<const uint8_t> word_start);

// <s> text </s>, truncated to max_len by dropping trailing text tokens.
EncodedSequence MakeModelInput(const EncodedSequence& text, size_t max_len);

// Graph-building losses; `graph` must be bound to a tape.
template <typename T>
Var<T> MlmLoss(EncoderGraph<T>& graph, const MaskedExample& example,
               const ForwardOptions& options = {});
template <typename T>
Var<T> SequenceClsLoss(EncoderGraph<T>& graph, const EncodedSequence& input,
                       int32_t label, const ForwardOptions& options = {});
template <typename T>
Var<T> TokenClsLoss(EncoderGraph<T>& graph, const EncodedSequence& input,
                    std::span<const int32_t> word_labels,
                    const ForwardOptions& options = {});

// Inference helpers (no dropout, no gradients).
template <typename T>
Tensor<T> ForwardEncoder(const ModelParams<T>& params, const SequenceBlock& block);
template <typename T>
T MlmLossValue(const ModelParams<T>& params, const MaskedExample& example);
// Throws std::invalid_argument for a missing or wrong-kind head.
template <typename T>
Tensor<T> SequenceClsForward(const ModelParams<T>& params,
                             const EncodedSequence& input);
template <typename T>
Tensor<T> TokenClsForward(const ModelParams<T>& params, const EncodedSequence& input);

}  // namespace tweetlm

#endif  // TWEETLM_MODEL_H_
