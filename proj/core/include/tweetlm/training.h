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

#ifndef TWEETLM_TRAINING_H_
#define TWEETLM_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tweetlm/blocks.h"
#include "tweetlm/evaluation.h"
#include "tweetlm/model.h"

namespace tweetlm {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

template <typename T>
struct OptimizerState {
  uint64_t step = 0;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  AdamConfig hyper;

  // Zeroed moments mirroring `params`.
  static OptimizerState For(const ParamStore<T>& params, const AdamConfig& hyper);
};

// Bias-corrected Adam update with decoupled weight decay:
//   p <- p * (1 - lr * wd)        (only where TakesWeightDecay(name))
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Throws NumericError naming the tensor on a non-finite gradient, and
// std::invalid_argument on shape mismatches.
template <typename T>
void AdamWStep(ParamStore<T>& params, std::span<const Tensor<T>> grads,
               OptimizerState<T>& state, double lr);

// Classic Adam, with weight decay (if any) folded into the gradient as an
// L2 term. Identical to AdamWStep when weight_decay is 0.
template <typename T>
void AdamStep(ParamStore<T>& params, std::span<const Tensor<T>> grads,
              OptimizerState<T>& state, double lr);

struct Schedule {
  enum class Kind { kWarmupLinearDecay, kConstant };

  Kind kind = Kind::kConstant;
  uint64_t warmup_steps = 0;
  uint64_t total_steps = 0;
  double lr_peak = 2e-5;

  static Schedule Constant(double lr_peak);
  // warmup_steps = round(warmup_fraction * total_steps).
  static Schedule WarmupLinearDecay(double lr_peak, uint64_t total_steps,
                                    double warmup_fraction = 0.06);
};

// Constant: lr_peak. Warmup: lr_peak * step / warmup_steps up to
// warmup_steps, then linear decay reaching 0 at total_steps and staying
// there.
double LrAt(uint64_t step, const Schedule& schedule);

struct EarlyStopState {
  double best_metric = -std::numeric_limits<double>::infinity();
  int64_t best_epoch = -1;
  size_t patience = 3;
  size_t epochs_since_improvement = 0;
};

// Records `metric` for `epoch`. Only a strictly greater metric counts as an
// improvement. Returns false once epochs_since_improvement reaches patience.
bool EarlyStopUpdate(EarlyStopState& state, double metric, int64_t epoch);

struct EarlyStopTrace {
  std::vector<double> metrics;  // one per epoch run, epoch k at index k - 1
  int64_t best_epoch = -1;
  double best_metric = -std::numeric_limits<double>::infinity();
  bool stopped_early = false;
};

// Runs epochs 1..max_epochs. `run_epoch(epoch)` trains one epoch and returns
// the validation metric; `on_improved(epoch)` is called whenever that epoch
// becomes the best so far.
EarlyStopTrace RunWithEarlyStopping(size_t max_epochs, size_t patience,
                                    const std::function<double(size_t)>& run_epoch,
                                    const std::function<void(size_t)>& on_improved);

struct PretrainOptions {
  size_t epochs = 20;
  size_t batch_size = 1280;
  uint64_t seed = 0;
  double lr_peak = 1e-4;
  double warmup_fraction = 0.06;
  // Stops early after this many optimizer steps; also fixes the schedule
  // length when set.
  std::optional<uint64_t> max_steps;
  AdamConfig adam{0.9, 0.999, 1e-8, 0.01};
  MaskingRates rates;
  bool whole_word = true;
  size_t threads = 1;
  // When non-empty, receives epoch-NNNN.ckpt files (epoch 0 = initial
  // weights) and a final.json manifest.
  std::filesystem::path checkpoint_dir;
  // JSON-per-line: step, epoch, loss, lr, wall_time.
  std::ostream* metrics_log = nullptr;
};

struct PretrainResult {
  ModelParams<float> params;
  std::vector<double> losses;  // one per optimizer step
  std::vector<std::filesystem::path> checkpoints;
  uint64_t steps = 0;
};

// MLM pretraining with per-epoch shard and block shuffling and dynamic
// re-masking. Each step averages cross-entropy over every selected token in
// the batch. Bit-reproducible for a fixed (seed, data, config, threads).
PretrainResult Pretrain(ModelParams<float> params, std::span<const Shard> shards,
                        const PretrainOptions& options);

struct ClsExample {
  EncodedSequence input;  // already wrapped by MakeModelInput
  int32_t label = 0;
};

struct TokenClsExample {
  EncodedSequence input;  // already wrapped by MakeModelInput
  std::vector<int32_t> labels;  // one per word
};

// "O" followed by B-X and I-X for each entity type, in that order.
std::vector<std::string> BioTagSet(std::span<const std::string> entity_types);

// Encodes the text and wraps it for the model.
ClsExample MakeClsExample(const Tokenizer& tokenizer, const LabeledTweet& tweet,
                          size_t max_len);

// Encodes the space-joined tokens; labels are the tag ids of the words that
// survive truncation to max_len. Throws DataError for a tag outside
// tag_names.
TokenClsExample MakeTokenClsExample(const Tokenizer& tokenizer,
                                    const ConllDocument& doc,
                                    std::span<const std::string> tag_names,
                                    size_t max_len);

struct FinetuneOptions {
  size_t max_epochs = 15;
  size_t batch_size = 32;
  double lr = 2e-5;
  AdamConfig adam{0.9, 0.999, 1e-8, 0.01};
  size_t patience = 3;
  uint64_t seed = 0;
  size_t threads = 1;
  // When non-empty, receives epoch-NNNN.ckpt files and best.json.
  std::filesystem::path checkpoint_dir;
  std::ostream* metrics_log = nullptr;
};

struct EpochRecord {
  size_t epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double val_accuracy = 0.0;
};

struct FinetuneResult {
  ModelParams<float> best;
  int64_t best_epoch = -1;
  double best_metric = 0.0;
  std::vector<EpochRecord> history;
  bool stopped_early = false;
};

// Validation metric: offensive-class F1. Requires a kSequenceCls head.
// Throws std::invalid_argument for an empty split.
FinetuneResult FinetuneSequenceCls(ModelParams<float> params,
                                   std::span<const ClsExample> train,
                                   std::span<const ClsExample> val,
                                   const FinetuneOptions& options);

// Validation metric: entity micro-F1 over BIO tags, `tag_names[label]`
// giving the tag for each class id. Requires a kTokenCls head.
FinetuneResult FinetuneTokenCls(ModelParams<float> params,
                                std::span<const TokenClsExample> train,
                                std::span<const TokenClsExample> val,
                                std::span<const std::string> tag_names,
                                const FinetuneOptions& options);

std::vector<int32_t> PredictSequenceCls(const ModelParams<float>& params,
                                        std::span<const EncodedSequence> inputs);
std::vector<std::vector<int32_t>> PredictTokenCls(
    const ModelParams<float>& params, std::span<const EncodedSequence> inputs);

}  // namespace tweetlm

#endif  // TWEETLM_TRAINING_H_
