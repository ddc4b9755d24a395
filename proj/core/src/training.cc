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

#include "tweetlm/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "tweetlm/checkpoint.h"
#include "tweetlm/error.h"
#include "tweetlm/evaluation.h"
#include "tweetlm/rng.h"

namespace tweetlm {
namespace {

using Clock = std::chrono::steady_clock;

template <typename T>
std::vector<Tensor<T>> ZerosLike(const ParamStore<T>& params) {
  std::vector<Tensor<T>> out;
  out.reserve(params.size());
  for (const Tensor<T>& t : params.tensors()) out.emplace_back(t.shape());
  return out;
}

template <typename T>
void CheckGrads(const ParamStore<T>& params, std::span<const Tensor<T>> grads,
                const OptimizerState<T>& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw std::invalid_argument("optimizer: gradient/parameter count mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params.tensor(i).shape()) {
      throw std::invalid_argument("optimizer: gradient shape " +
                                  ShapeString(grads[i].shape()) + " for parameter " +
                                  params.name(i) + " of shape " +
                                  ShapeString(params.tensor(i).shape()));
    }
    if (!grads[i].AllFinite()) {
      throw NumericError("non-finite gradient for " + params.name(i));
    }
  }
}

template <typename T>
void AdamUpdate(ParamStore<T>& params, std::span<const Tensor<T>> grads,
                OptimizerState<T>& state, double lr, bool decoupled) {
  CheckGrads(params, grads, state);
  const AdamConfig& h = state.hyper;
  ++state.step;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const bool decay = h.weight_decay != 0.0 && TakesWeightDecay(params.name(i));
    auto p = params.tensor(i).data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (size_t k = 0; k < p.size(); ++k) {
      double grad = g[k];
      double w = p[k];
      if (decay) {
        if (decoupled) {
          w *= 1.0 - lr * h.weight_decay;
        } else {
          grad += h.weight_decay * w;
        }
      }
      const double mk = h.beta1 * m[k] + (1.0 - h.beta1) * grad;
      const double vk = h.beta2 * v[k] + (1.0 - h.beta2) * grad * grad;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      w -= lr * (mk / bc1) / (std::sqrt(vk / bc2) + h.eps);
      p[k] = static_cast<T>(w);
    }
  }
}

// Runs fn(item, acc) -> loss contribution over [0, n) on up to `threads`
// workers with contiguous chunks, then reduces the per-worker gradients in
// worker order. The result depends only on (inputs, threads).
template <typename Fn>
double ParallelGrads(size_t n, size_t threads, const ParamStore<float>& params,
                     std::vector<Tensor<float>>& grads, Fn fn) {
  for (Tensor<float>& g : grads) g.Fill(0.0f);
  const size_t workers = std::max<size_t>(1, std::min(threads, n));
  if (workers == 1) {
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) loss += fn(i, grads);
    return loss;
  }
  std::vector<std::vector<Tensor<float>>> local(workers);
  std::vector<double> losses(workers, 0.0);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        local[w] = ZerosLike(params);
        const size_t begin = n * w / workers;
        const size_t end = n * (w + 1) / workers;
        for (size_t i = begin; i < end; ++i) losses[w] += fn(i, local[w]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double loss = 0.0;
  for (size_t w = 0; w < workers; ++w) {
    loss += losses[w];
    for (size_t t = 0; t < grads.size(); ++t) {
      auto dst = grads[t].data();
      auto src = local[w][t].data();
      for (size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return loss;
}

std::filesystem::path EpochCheckpointPath(const std::filesystem::path& dir,
                                          size_t epoch) {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch-%04zu.ckpt", epoch);
  return dir / name;
}

void WriteManifest(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  out << doc.dump(2) << '\n';
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

template <typename Scores>
int32_t Argmax(const Scores& row, size_t begin, size_t n) {
  size_t best = 0;
  for (size_t c = 1; c < n; ++c) {
    if (row[begin + c] > row[begin + best]) best = c;
  }
  return static_cast<int32_t>(best);
}

}  // namespace

template <typename T>
OptimizerState<T> OptimizerState<T>::For(const ParamStore<T>& params,
                                         const AdamConfig& hyper) {
  OptimizerState<T> state;
  state.hyper = hyper;
  state.first_moment = ZerosLike(params);
  state.second_moment = ZerosLike(params);
  return state;
}

template <typename T>
void AdamWStep(ParamStore<T>& params, std::span<const Tensor<T>> grads,
               OptimizerState<T>& state, double lr) {
  AdamUpdate(params, grads, state, lr, /*decoupled=*/true);
}

template <typename T>
void AdamStep(ParamStore<T>& params, std::span<const Tensor<T>> grads,
              OptimizerState<T>& state, double lr) {
  AdamUpdate(params, grads, state, lr, /*decoupled=*/false);
}

template struct OptimizerState<float>;
template struct OptimizerState<double>;
template void AdamWStep(ParamStore<float>&, std::span<const Tensor<float>>,
                        OptimizerState<float>&, double);
template void AdamWStep(ParamStore<double>&, std::span<const Tensor<double>>,
                        OptimizerState<double>&, double);
template void AdamStep(ParamStore<float>&, std::span<const Tensor<float>>,
                       OptimizerState<float>&, double);
template void AdamStep(ParamStore<double>&, std::span<const Tensor<double>>,
                       OptimizerState<double>&, double);

Schedule Schedule::Constant(double lr_peak) {
  Schedule s;
  s.kind = Kind::kConstant;
  s.lr_peak = lr_peak;
  return s;
}

Schedule Schedule::WarmupLinearDecay(double lr_peak, uint64_t total_steps,
                                     double warmup_fraction) {
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw std::invalid_argument("warmup_fraction must be in [0, 1]");
  }
  Schedule s;
  s.kind = Kind::kWarmupLinearDecay;
  s.lr_peak = lr_peak;
  s.total_steps = total_steps;
  s.warmup_steps = static_cast<uint64_t>(
      std::llround(warmup_fraction * static_cast<double>(total_steps)));
  return s;
}

double LrAt(uint64_t step, const Schedule& s) {
  if (s.kind == Schedule::Kind::kConstant) return s.lr_peak;
  if (s.warmup_steps > s.total_steps) {
    throw std::invalid_argument("warmup_steps exceeds total_steps");
  }
  if (step < s.warmup_steps) {
    return s.lr_peak * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  if (step == s.warmup_steps) return s.lr_peak;
  if (step >= s.total_steps) return 0.0;
  return s.lr_peak * static_cast<double>(s.total_steps - step) /
         static_cast<double>(s.total_steps - s.warmup_steps);
}

bool EarlyStopUpdate(EarlyStopState& state, double metric, int64_t epoch) {
  if (metric > state.best_metric) {
    state.best_metric = metric;
    state.best_epoch = epoch;
    state.epochs_since_improvement = 0;
  } else {
    ++state.epochs_since_improvement;
  }
  return state.epochs_since_improvement < state.patience;
}

EarlyStopTrace RunWithEarlyStopping(size_t max_epochs, size_t patience,
                                    const std::function<double(size_t)>& run_epoch,
                                    const std::function<void(size_t)>& on_improved) {
  EarlyStopState state;
  state.patience = patience;
  EarlyStopTrace trace;
  for (size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const double metric = run_epoch(epoch);
    trace.metrics.push_back(metric);
    const int64_t previous_best = state.best_epoch;
    const bool keep_going = EarlyStopUpdate(state, metric, static_cast<int64_t>(epoch));
    if (state.best_epoch != previous_best && on_improved) on_improved(epoch);
    if (!keep_going) {
      trace.stopped_early = epoch < max_epochs;
      break;
    }
  }
  trace.best_epoch = state.best_epoch;
  trace.best_metric = state.best_metric;
  return trace;
}

PretrainResult Pretrain(ModelParams<float> params, std::span<const Shard> shards,
                        const PretrainOptions& options) {
  if (shards.empty()) throw std::invalid_argument("pretraining needs at least one shard");
  if (options.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  options.rates.Validate();
  size_t n_blocks = 0;
  for (const Shard& shard : shards) {
    if (shard.max_len > params.config.max_len) {
      throw std::invalid_argument("shard max_len exceeds the model max_len");
    }
    n_blocks += shard.blocks.size();
  }
  if (n_blocks == 0) throw std::invalid_argument("shards contain no blocks");

  const uint64_t steps_per_epoch = (n_blocks + options.batch_size - 1) / options.batch_size;
  const uint64_t total_steps =
      options.max_steps ? *options.max_steps : steps_per_epoch * options.epochs;
  const Schedule schedule =
      Schedule::WarmupLinearDecay(options.lr_peak, total_steps, options.warmup_fraction);
  const uint64_t shuffle_seed = DeriveSeed(options.seed, "pretrain_shuffle");
  const uint64_t mask_seed = DeriveSeed(options.seed, "masking");
  const uint64_t dropout_seed = DeriveSeed(options.seed, "dropout");
  const size_t vocab_size = params.config.vocab_size;

  PretrainResult result;
  OptimizerState<float> state = OptimizerState<float>::For(params.tensors, options.adam);
  std::vector<Tensor<float>> grads = ZerosLike(params.tensors);
  const auto start = Clock::now();

  auto checkpoint = [&](size_t epoch) {
    if (options.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(options.checkpoint_dir);
    const auto path = EpochCheckpointPath(options.checkpoint_dir, epoch);
    SaveCheckpoint(path, params);
    result.checkpoints.push_back(path);
    WriteManifest(options.checkpoint_dir / "final.json",
                  {{"epoch", epoch},
                   {"step", state.step},
                   {"checkpoint", path.filename().string()}});
  };
  checkpoint(0);

  bool done = total_steps == 0;
  for (size_t epoch = 1; epoch <= options.epochs && !done; ++epoch) {
    Rng rng(MixSeed(shuffle_seed, epoch));
    std::vector<size_t> shard_order(shards.size());
    std::iota(shard_order.begin(), shard_order.end(), 0);
    rng.Shuffle(shard_order.begin(), shard_order.end());
    std::vector<const SequenceBlock*> order;
    order.reserve(n_blocks);
    for (size_t s : shard_order) {
      std::vector<const SequenceBlock*> blocks;
      for (const SequenceBlock& b : shards[s].blocks) blocks.push_back(&b);
      rng.Shuffle(blocks.begin(), blocks.end());
      order.insert(order.end(), blocks.begin(), blocks.end());
    }

    for (size_t begin = 0; begin < order.size() && !done; begin += options.batch_size) {
      const size_t end = std::min(order.size(), begin + options.batch_size);
      std::vector<MaskedExample> batch;
      size_t n_selected = 0;
      for (size_t i = begin; i < end; ++i) {
        MaskedExample ex = SampleMasking(*order[i], mask_seed, epoch, options.rates,
                                         options.whole_word, vocab_size);
        if (ex.selected_positions.empty()) continue;
        n_selected += ex.selected_positions.size();
        batch.push_back(std::move(ex));
      }
      if (batch.empty()) continue;

      const uint64_t step = state.step;
      const double loss = ParallelGrads(
          batch.size(), options.threads, params.tensors, grads,
          [&](size_t i, std::vector<Tensor<float>>& acc) {
            Tape<float> tape;
            EncoderGraph<float> graph(tape, params);
            ForwardOptions fwd;
            fwd.train = true;
            fwd.dropout_seed = MixSeed(dropout_seed, step, i);
            const Var<float> ex_loss = MlmLoss(graph, batch[i], fwd);
            const double weight = static_cast<double>(batch[i].selected_positions.size()) /
                                  static_cast<double>(n_selected);
            tape.Backward(Scale(ex_loss, static_cast<float>(weight)));
            AccumulateGrads(graph, acc);
            return static_cast<double>(ex_loss.value()[0]) * weight;
          });
      const double lr = LrAt(step, schedule);
      AdamWStep(params.tensors, std::span<const Tensor<float>>(grads), state, lr);
      result.losses.push_back(loss);
      if (options.metrics_log != nullptr) {
        nlohmann::ordered_json line = {{"step", state.step},
                                       {"epoch", epoch},
                                       {"loss", loss},
                                       {"lr", lr},
                                       {"wall_time", Seconds(start)}};
        *options.metrics_log << line.dump() << '\n';
      }
      done = state.step >= total_steps;
    }
    checkpoint(epoch);
  }
  result.steps = state.step;
  result.params = std::move(params);
  return result;
}

std::vector<std::string> BioTagSet(std::span<const std::string> entity_types) {
  std::vector<std::string> tags = {"O"};
  for (const std::string& type : entity_types) {
    tags.push_back("B-" + type);
    tags.push_back("I-" + type);
  }
  return tags;
}

ClsExample MakeClsExample(const Tokenizer& tokenizer, const LabeledTweet& tweet,
                          size_t max_len) {
  return ClsExample{MakeModelInput(tokenizer.Encode(tweet.text), max_len), tweet.label};
}

TokenClsExample MakeTokenClsExample(const Tokenizer& tokenizer,
                                    const ConllDocument& doc,
                                    std::span<const std::string> tag_names,
                                    size_t max_len) {
  std::string text;
  for (const std::string& token : doc.tokens) {
    if (!text.empty()) text += ' ';
    text += token;
  }
  TokenClsExample ex;
  ex.input = MakeModelInput(tokenizer.Encode(text), max_len);
  const size_t n_words = WordPositions(ex.input.word_start).size();
  if (n_words > doc.tags.size()) {
    throw DataError("document has tokens containing whitespace");
  }
  for (size_t w = 0; w < n_words; ++w) {
    const auto it = std::find(tag_names.begin(), tag_names.end(), doc.tags[w]);
    if (it == tag_names.end()) throw DataError("unknown tag " + doc.tags[w]);
    ex.labels.push_back(static_cast<int32_t>(it - tag_names.begin()));
  }
  return ex;
}

namespace {

struct FinetuneHooks {
  // Adds the gradient of example i's loss (times `weight`) into acc and
  // returns the weighted loss.
  std::function<double(const ModelParams<float>&, size_t, double, uint64_t,
                       std::vector<Tensor<float>>&)>
      example_grad;
  // Loss weight denominators: per-example counts (words) for token-level
  // averaging.
  std::function<size_t(size_t)> example_weight;
  // Returns (metric, accuracy) on the validation split.
  std::function<std::pair<double, double>(const ModelParams<float>&)> evaluate;
};

FinetuneResult RunFinetune(ModelParams<float> params, size_t n_train,
                           const FinetuneHooks& hooks, const FinetuneOptions& options,
                           const char* task) {
  if (options.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  const Schedule schedule = Schedule::Constant(options.lr);
  OptimizerState<float> state = OptimizerState<float>::For(params.tensors, options.adam);
  std::vector<Tensor<float>> grads = ZerosLike(params.tensors);
  const uint64_t shuffle_seed = DeriveSeed(options.seed, "finetune_shuffle");
  const uint64_t dropout_seed = DeriveSeed(options.seed, "finetune_dropout");
  const auto start = Clock::now();

  FinetuneResult result;
  result.best = params;
  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
  }

  auto run_epoch = [&](size_t epoch) {
    std::vector<size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(MixSeed(shuffle_seed, epoch));
    rng.Shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    size_t n_batches = 0;
    for (size_t begin = 0; begin < n_train; begin += options.batch_size) {
      const size_t end = std::min(n_train, begin + options.batch_size);
      size_t denom = 0;
      for (size_t i = begin; i < end; ++i) denom += hooks.example_weight(order[i]);
      const uint64_t step = state.step;
      const double loss = ParallelGrads(
          end - begin, options.threads, params.tensors, grads,
          [&](size_t k, std::vector<Tensor<float>>& acc) {
            const size_t idx = order[begin + k];
            const double weight = static_cast<double>(hooks.example_weight(idx)) /
                                  static_cast<double>(denom);
            return hooks.example_grad(params, idx, weight,
                                      MixSeed(dropout_seed, step, k), acc);
          });
      AdamWStep(params.tensors, std::span<const Tensor<float>>(grads), state,
                LrAt(step, schedule));
      loss_sum += loss;
      ++n_batches;
    }
    const auto [metric, accuracy] = hooks.evaluate(params);
    EpochRecord record{epoch, loss_sum / static_cast<double>(n_batches), metric, accuracy};
    result.history.push_back(record);
    if (!options.checkpoint_dir.empty()) {
      SaveCheckpoint(EpochCheckpointPath(options.checkpoint_dir, epoch), params);
    }
    if (options.metrics_log != nullptr) {
      nlohmann::ordered_json line = {{"task", task},
                                     {"epoch", epoch},
                                     {"step", state.step},
                                     {"loss", record.train_loss},
                                     {"lr", options.lr},
                                     {"val_metric", metric},
                                     {"val_accuracy", accuracy},
                                     {"wall_time", Seconds(start)}};
      *options.metrics_log << line.dump() << '\n';
    }
    return metric;
  };
  auto on_improved = [&](size_t epoch) {
    result.best = params;
    if (!options.checkpoint_dir.empty()) {
      WriteManifest(options.checkpoint_dir / "best.json",
                    {{"task", task},
                     {"epoch", epoch},
                     {"metric", result.history.back().val_metric},
                     {"checkpoint",
                      EpochCheckpointPath(options.checkpoint_dir, epoch).filename().string()}});
    }
  };

  const EarlyStopTrace trace =
      RunWithEarlyStopping(options.max_epochs, options.patience, run_epoch, on_improved);
  result.best_epoch = trace.best_epoch;
  result.best_metric = trace.best_epoch < 0 ? 0.0 : trace.best_metric;
  result.stopped_early = trace.stopped_early;
  return result;
}

}  // namespace

FinetuneResult FinetuneSequenceCls(ModelParams<float> params,
                                   std::span<const ClsExample> train,
                                   std::span<const ClsExample> val,
                                   const FinetuneOptions& options) {
  if (train.empty() || val.empty()) {
    throw std::invalid_argument("fine-tuning needs non-empty train and validation splits");
  }
  if (params.head.kind != HeadKind::kSequenceCls) {
    throw std::invalid_argument("model has no sequence classification head");
  }
  std::vector<EncodedSequence> val_inputs;
  std::vector<int32_t> val_gold;
  for (const ClsExample& ex : val) {
    val_inputs.push_back(ex.input);
    val_gold.push_back(ex.label);
  }
  FinetuneHooks hooks;
  hooks.example_weight = [](size_t) { return size_t{1}; };
  hooks.example_grad = [&](const ModelParams<float>& p, size_t i, double weight,
                           uint64_t seed, std::vector<Tensor<float>>& acc) {
    Tape<float> tape;
    EncoderGraph<float> graph(tape, p);
    ForwardOptions fwd{true, seed, false};
    const Var<float> loss = SequenceClsLoss(graph, train[i].input, train[i].label, fwd);
    tape.Backward(Scale(loss, static_cast<float>(weight)));
    AccumulateGrads(graph, acc);
    return static_cast<double>(loss.value()[0]) * weight;
  };
  hooks.evaluate = [&](const ModelParams<float>& p) {
    const std::vector<int32_t> pred = PredictSequenceCls(p, val_inputs);
    const MetricsReport report = BinaryClsMetrics(val_gold, pred);
    return std::pair{report.f1, report.accuracy};
  };
  return RunFinetune(std::move(params), train.size(), hooks, options, "sequence_cls");
}

FinetuneResult FinetuneTokenCls(ModelParams<float> params,
                                std::span<const TokenClsExample> train,
                                std::span<const TokenClsExample> val,
                                std::span<const std::string> tag_names,
                                const FinetuneOptions& options) {
  if (train.empty() || val.empty()) {
    throw std::invalid_argument("fine-tuning needs non-empty train and validation splits");
  }
  if (params.head.kind != HeadKind::kTokenCls) {
    throw std::invalid_argument("model has no token classification head");
  }
  if (tag_names.size() != params.head.n_classes) {
    throw std::invalid_argument("tag name count differs from head classes");
  }
  std::vector<EncodedSequence> val_inputs;
  std::vector<std::vector<std::string>> val_gold;
  for (const TokenClsExample& ex : val) {
    val_inputs.push_back(ex.input);
    std::vector<std::string> tags;
    for (int32_t label : ex.labels) tags.push_back(tag_names[label]);
    val_gold.push_back(std::move(tags));
  }
  FinetuneHooks hooks;
  hooks.example_weight = [&](size_t i) { return train[i].labels.size(); };
  hooks.example_grad = [&](const ModelParams<float>& p, size_t i, double weight,
                           uint64_t seed, std::vector<Tensor<float>>& acc) {
    Tape<float> tape;
    EncoderGraph<float> graph(tape, p);
    ForwardOptions fwd{true, seed, false};
    const Var<float> loss = TokenClsLoss(graph, train[i].input, train[i].labels, fwd);
    tape.Backward(Scale(loss, static_cast<float>(weight)));
    AccumulateGrads(graph, acc);
    return static_cast<double>(loss.value()[0]) * weight;
  };
  hooks.evaluate = [&](const ModelParams<float>& p) {
    const auto pred_ids = PredictTokenCls(p, val_inputs);
    std::vector<std::vector<std::string>> pred;
    for (const auto& row : pred_ids) {
      std::vector<std::string> tags;
      for (int32_t label : row) tags.push_back(tag_names[label]);
      pred.push_back(std::move(tags));
    }
    const MetricsReport report =
        EntityPrf(std::span<const std::vector<std::string>>(val_gold),
                  std::span<const std::vector<std::string>>(pred));
    return std::pair{report.micro_f1, report.accuracy};
  };
  return RunFinetune(std::move(params), train.size(), hooks, options, "token_cls");
}

std::vector<int32_t> PredictSequenceCls(const ModelParams<float>& params,
                                        std::span<const EncodedSequence> inputs) {
  std::vector<int32_t> out;
  out.reserve(inputs.size());
  for (const EncodedSequence& input : inputs) {
    const Tensor<float> logits = SequenceClsForward(params, input);
    out.push_back(Argmax(logits.data(), 0, logits.size()));
  }
  return out;
}

std::vector<std::vector<int32_t>> PredictTokenCls(const ModelParams<float>& params,
                                                  std::span<const EncodedSequence> inputs) {
  std::vector<std::vector<int32_t>> out;
  out.reserve(inputs.size());
  for (const EncodedSequence& input : inputs) {
    const Tensor<float> logits = TokenClsForward(params, input);
    std::vector<int32_t> row;
    for (size_t r = 0; r < logits.rows(); ++r) {
      row.push_back(Argmax(logits.data(), r * logits.cols(), logits.cols()));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace tweetlm
