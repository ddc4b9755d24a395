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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tweetlm/blocks.h"
#include "tweetlm/checkpoint.h"
#include "tweetlm/corpus.h"
#include "tweetlm/error.h"
#include "tweetlm/evaluation.h"
#include "tweetlm/model.h"
#include "tweetlm/rng.h"
#include "tweetlm/synthetic.h"
#include "tweetlm/tokenizer.h"
#include "tweetlm/training.h"

namespace tweetlm::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  uint64_t seed = 0;
  size_t threads = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
};

class Logger {
 public:
  Logger(std::ostream& err, const bool& quiet) : err_(err), quiet_(quiet) {}

  template <typename... Args>
  void operator()(const Args&... args) const {
    if (quiet_) return;
    err_ << "[tweetlm] ";
    (err_ << ... << args);
    err_ << '\n';
  }

 private:
  std::ostream& err_;
  const bool& quiet_;
};

std::ifstream OpenIn(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return in;
}

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

// Non-empty lines with any trailing CR removed.
std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in = OpenIn(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Files as given; directories expand to their *.shard files in name order.
std::vector<fs::path> ExpandShardPaths(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& input : inputs) {
    if (fs::is_directory(input)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(input)) {
        if (entry.path().extension() == ".shard") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(input);
    }
  }
  if (out.empty()) throw DataError("no shard files found");
  return out;
}

struct ModelFlags {
  std::string preset = "toy";
  size_t layers = 0;
  size_t hidden = 0;
  size_t heads = 0;
  size_t ffn = 0;
  size_t max_len = 0;
  double dropout = -1.0;

  void Register(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Model size preset")
        ->check(CLI::IsMember({"toy", "base"}))
        ->capture_default_str();
    cmd->add_option("--layers", layers, "Transformer layers (0 = preset)");
    cmd->add_option("--hidden", hidden, "Hidden size (0 = preset)");
    cmd->add_option("--heads", heads, "Attention heads (0 = preset)");
    cmd->add_option("--ffn", ffn, "Feed-forward size (0 = preset)");
    cmd->add_option("--model-max-len", max_len,
                    "Position embeddings (0 = the shard block length)");
    cmd->add_option("--dropout", dropout, "Dropout rate (negative = preset)");
  }

  TransformerConfig Build(size_t vocab_size, size_t block_len) const {
    TransformerConfig config =
        preset == "base" ? TransformerConfig::Base() : TransformerConfig::Toy();
    if (layers) config.n_layers = layers;
    if (hidden) config.hidden_dim = hidden;
    if (heads) config.n_heads = heads;
    if (ffn) config.ffn_dim = ffn;
    config.max_len = max_len ? max_len : block_len;
    if (dropout >= 0.0) config.dropout_rate = dropout;
    config.vocab_size = vocab_size;
    config.Validate();
    return config;
  }
};

struct FinetuneFlags {
  std::string checkpoint;
  std::string vocab;
  std::string output_dir;
  size_t epochs = 15;
  size_t batch_size = 32;
  double lr = 2e-5;
  double weight_decay = 0.01;
  size_t patience = 3;

  void Register(CLI::App* cmd, size_t default_epochs) {
    epochs = default_epochs;
    cmd->add_option("--checkpoint", checkpoint, "Pretrained checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--vocab", vocab, "Tokenizer file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output-dir", output_dir, "Checkpoints, best.json, best.ckpt")
        ->required();
    cmd->add_option("--epochs", epochs, "Maximum epochs")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Batch size")->capture_default_str();
    cmd->add_option("--lr", lr, "Constant learning rate")->capture_default_str();
    cmd->add_option("--weight-decay", weight_decay, "AdamW weight decay")
        ->capture_default_str();
    cmd->add_option("--patience", patience, "Early stopping patience")
        ->capture_default_str();
  }

  FinetuneOptions Build(const Globals& g, std::ostream* metrics) const {
    FinetuneOptions options;
    options.max_epochs = epochs;
    options.batch_size = batch_size;
    options.lr = lr;
    options.adam.weight_decay = weight_decay;
    options.patience = patience;
    options.seed = g.seed;
    options.threads = g.threads;
    options.checkpoint_dir = output_dir;
    options.metrics_log = metrics;
    return options;
  }
};

void WriteFinetuneSummary(const fs::path& dir, const FinetuneResult& result) {
  SaveCheckpoint(dir / "best.ckpt", result.best);
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  for (const EpochRecord& r : result.history) {
    history.push_back({{"epoch", r.epoch},
                       {"train_loss", r.train_loss},
                       {"val_metric", r.val_metric},
                       {"val_accuracy", r.val_accuracy}});
  }
  nlohmann::ordered_json doc = {{"best_epoch", result.best_epoch},
                                {"best_metric", result.best_metric},
                                {"stopped_early", result.stopped_early},
                                {"history", history}};
  OpenOut(dir / "history.json") << doc.dump(2) << '\n';
}

ModelParams<float> LoadWithHead(const fs::path& checkpoint, const Tokenizer& tokenizer,
                                const TaskHead& head, uint64_t seed) {
  ModelParams<float> params = LoadCheckpoint(checkpoint);
  if (params.config.vocab_size != tokenizer.vocab().size()) {
    throw DataError("checkpoint vocabulary size " + std::to_string(params.config.vocab_size) +
                    " differs from the tokenizer's " +
                    std::to_string(tokenizer.vocab().size()));
  }
  AttachHead(params, head, seed);
  return params;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Globals g;
  Logger log(err, g.quiet);

  CLI::App app{"tweetlm: tweet language model pipeline", "tweetlm"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI config file; command-line flags win")
      ->envname("TWEETLM_CONFIG");
  app.add_option("--seed", g.seed, "Global seed for every random choice")
      ->capture_default_str();
  app.add_option("--threads", g.threads,
                 "Worker threads (1 gives bit-exact reproducibility)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("-q,--quiet", g.quiet, "No progress logging");

  // preprocess
  std::string pp_input, pp_output, pp_stats, pp_format = "jsonl", pp_lang;
  size_t pp_min_tokens = 5;
  bool pp_exact = false;
  CLI::App* preprocess =
      app.add_subcommand("preprocess", "Parse, normalize, filter and deduplicate tweets");
  preprocess->add_option("--input", pp_input, "Raw tweets")->required()->check(CLI::ExistingFile);
  preprocess->add_option("--output", pp_output, "Normalized tweets, one per line")->required();
  preprocess->add_option("--stats", pp_stats, "Stats JSON path (default: stdout)");
  preprocess->add_option("--format", pp_format, "Input format")
      ->check(CLI::IsMember({"jsonl", "plain"}))
      ->capture_default_str();
  preprocess->add_option("--lang", pp_lang, "Keep only this language tag (JSONL)");
  preprocess->add_option("--min-tokens", pp_min_tokens, "Minimum whitespace tokens")
      ->capture_default_str();
  preprocess->add_flag("--exact-dedup", pp_exact,
                       "Compare full texts instead of 128-bit digests");

  // train-tokenizer
  std::string tt_input, tt_output;
  BpeTrainOptions bpe;
  CLI::App* train_tok = app.add_subcommand("train-tokenizer", "Learn a BPE vocabulary");
  train_tok->add_option("--input", tt_input, "Normalized tweets")->required()->check(CLI::ExistingFile);
  train_tok->add_option("--output", tt_output, "Tokenizer file")->required();
  train_tok->add_option("--vocab-size", bpe.vocab_size, "Target vocabulary size")
      ->capture_default_str();
  train_tok->add_option("--min-pair-count", bpe.min_pair_count,
                        "Stop when the best pair is rarer than this")
      ->capture_default_str();

  // encode
  std::string en_vocab, en_input, en_output;
  bool en_decode = false;
  CLI::App* encode = app.add_subcommand("encode", "Text lines to token ids or back");
  encode->add_option("--vocab", en_vocab, "Tokenizer file")->required()->check(CLI::ExistingFile);
  encode->add_option("--input", en_input, "Input lines")->required()->check(CLI::ExistingFile);
  encode->add_option("--output", en_output, "Output path (default: stdout)");
  encode->add_flag("--decode", en_decode, "Input lines are space-separated ids");

  // pack
  std::string pk_vocab, pk_input, pk_output_dir;
  size_t pk_max_len = kDefaultMaxLen, pk_blocks_per_shard = 0;
  CLI::App* pack = app.add_subcommand("pack", "Encode and pack tweets into shard files");
  pack->add_option("--vocab", pk_vocab, "Tokenizer file")->required()->check(CLI::ExistingFile);
  pack->add_option("--input", pk_input, "Normalized tweets")->required()->check(CLI::ExistingFile);
  pack->add_option("--output-dir", pk_output_dir, "Shard directory")->required();
  pack->add_option("--max-len", pk_max_len, "Block length")->capture_default_str();
  pack->add_option("--blocks-per-shard", pk_blocks_per_shard,
                   "Blocks per shard file (0 = one shard)")
      ->capture_default_str();

  // pretrain
  std::string pt_vocab, pt_output_dir;
  std::vector<std::string> pt_shards;
  ModelFlags pt_model;
  PretrainOptions pt;
  uint64_t pt_max_steps = 0;
  bool pt_token_masking = false;
  CLI::App* pretrain = app.add_subcommand("pretrain", "Masked language model pretraining");
  pretrain->add_option("--vocab", pt_vocab, "Tokenizer file")->required()->check(CLI::ExistingFile);
  pretrain->add_option("--shards", pt_shards, "Shard files or directories")->required();
  pretrain->add_option("--output-dir", pt_output_dir,
                       "Checkpoints, final.json and metrics.jsonl")
      ->required();
  pt_model.Register(pretrain);
  pretrain->add_option("--epochs", pt.epochs, "Epochs")->capture_default_str();
  pretrain->add_option("--batch-size", pt.batch_size, "Blocks per step")->capture_default_str();
  pretrain->add_option("--lr", pt.lr_peak, "Peak learning rate")->capture_default_str();
  pretrain->add_option("--warmup-fraction", pt.warmup_fraction,
                       "Share of steps spent warming up")
      ->capture_default_str();
  pretrain->add_option("--max-steps", pt_max_steps, "Step budget (0 = epochs only)");
  pretrain->add_option("--beta2", pt.adam.beta2, "Adam beta2")->capture_default_str();
  pretrain->add_option("--weight-decay", pt.adam.weight_decay, "AdamW weight decay")
      ->capture_default_str();
  pretrain->add_option("--select-rate", pt.rates.select, "Masking selection rate")
      ->capture_default_str();
  pretrain->add_option("--mask-rate", pt.rates.mask, "Selected tokens set to <mask>")
      ->capture_default_str();
  pretrain->add_option("--random-rate", pt.rates.random, "Selected tokens randomized")
      ->capture_default_str();
  pretrain->add_option("--keep-rate", pt.rates.keep, "Selected tokens kept")
      ->capture_default_str();
  pretrain->add_flag("--token-masking", pt_token_masking,
                     "Select single tokens instead of whole words");

  // finetune-cls
  std::string fc_data, fc_train, fc_val;
  FinetuneFlags fc;
  CLI::App* finetune_cls =
      app.add_subcommand("finetune-cls", "Fine-tune offensive tweet classification");
  fc.Register(finetune_cls, 15);
  finetune_cls->add_option("--data", fc_data,
                           "Labeled TSV, split 70/15/15 (train/val/test.tsv written)")
      ->check(CLI::ExistingFile);
  finetune_cls->add_option("--train", fc_train, "Training TSV")->check(CLI::ExistingFile);
  finetune_cls->add_option("--val", fc_val, "Validation TSV")->check(CLI::ExistingFile);

  // finetune-ner
  std::string fn_train, fn_val;
  double fn_holdout = 0.10;
  FinetuneFlags fn;
  CLI::App* finetune_ner = app.add_subcommand("finetune-ner", "Fine-tune BIO tagging");
  fn.Register(finetune_ner, 30);
  finetune_ner->add_option("--train", fn_train, "Training CoNLL")
      ->required()
      ->check(CLI::ExistingFile);
  finetune_ner->add_option("--val", fn_val, "Validation CoNLL (default: seeded holdout)")
      ->check(CLI::ExistingFile);
  finetune_ner->add_option("--holdout", fn_holdout,
                           "Share of training documents held out without --val")
      ->capture_default_str();

  // eval
  std::string ev_task, ev_checkpoint, ev_vocab, ev_data, ev_output;
  CLI::App* eval = app.add_subcommand("eval", "Score a fine-tuned checkpoint");
  eval->add_option("--task", ev_task, "Task")->required()->check(CLI::IsMember({"cls", "ner"}));
  eval->add_option("--checkpoint", ev_checkpoint, "Fine-tuned checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--vocab", ev_vocab, "Tokenizer file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", ev_data, "Labeled TSV or CoNLL")->required()->check(CLI::ExistingFile);
  eval->add_option("--output", ev_output, "Report path (default: stdout)");

  // stats
  std::string st_input;
  CLI::App* stats = app.add_subcommand("stats", "Statistics of a normalized corpus");
  stats->add_option("--input", st_input, "Normalized tweets")->required()->check(CLI::ExistingFile);

  // estimate
  uint64_t es_tweets = 0, es_max_len = kDefaultMaxLen, es_epochs = 0, es_batch = 0;
  double es_mean_tokens = 0.0;
  CLI::App* estimate = app.add_subcommand("estimate", "Block and step counts for a corpus");
  estimate->add_option("--tweets", es_tweets, "Number of tweets")->required();
  estimate->add_option("--mean-tokens", es_mean_tokens, "Mean subword tokens per tweet")
      ->required();
  estimate->add_option("--max-len", es_max_len, "Block length")->capture_default_str();
  estimate->add_option("--epochs", es_epochs, "Also print optimizer steps for this many epochs");
  estimate->add_option("--batch-size", es_batch, "Blocks per step (with --epochs)");

  // synth
  std::string sy_kind, sy_output;
  size_t sy_n = 1000;
  double sy_positive = 0.225;
  CLI::App* synth = app.add_subcommand("synth", "Write a seeded synthetic fixture");
  synth->add_option("--kind", sy_kind, "Fixture kind")
      ->required()
      ->check(CLI::IsMember({"tweets", "cycle", "theme", "offensive", "ner"}));
  synth->add_option("--n", sy_n, "Number of items")->capture_default_str();
  synth->add_option("--positive-fraction", sy_positive, "Offensive share (offensive)")
      ->capture_default_str();
  synth->add_option("--output", sy_output, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand --help surfaces here with the subcommand still selected.
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      const auto chosen = app.get_subcommands();
      out << (chosen.empty() ? app.help() : chosen.front()->help());
      return kOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*preprocess) {
      std::ifstream in = OpenIn(pp_input);
      TweetReader reader(in, pp_format == "jsonl" ? TweetFormat::kJsonl : TweetFormat::kPlain);
      TweetFilter filter(pp_min_tokens,
                         pp_lang.empty() ? std::nullopt : std::optional<std::string>(pp_lang));
      Deduplicator dedup(pp_exact);
      StatsAccumulator acc;
      std::ofstream sink = OpenOut(pp_output);
      while (std::optional<RawTweet> raw = reader.Next()) {
        std::optional<NormalizedTweet> tweet = filter.Apply(*raw);
        if (!tweet || !dedup.Insert(tweet->text)) continue;
        sink << tweet->text << '\n';
        acc.Add(*tweet);
      }
      CorpusStats s = acc.Finish();
      s.n_dropped_short = filter.n_dropped_short();
      s.n_dropped_lang = filter.n_dropped_lang();
      s.n_dropped_dup = dedup.n_dropped();
      s.n_malformed = reader.report().n_malformed();
      for (uint64_t line : reader.report().malformed_lines) {
        log("skipped malformed line ", line);
      }
      if (pp_stats.empty()) {
        out << CorpusStatsToJson(s) << '\n';
      } else {
        OpenOut(pp_stats) << CorpusStatsToJson(s) << '\n';
      }
      log("kept ", s.n_tweets, " tweets");
    } else if (*train_tok) {
      const std::vector<std::string> corpus = ReadLines(tt_input);
      const Tokenizer tok = TrainBpe(corpus, bpe);
      SaveTokenizer(tok, tt_output);
      log("vocabulary of ", tok.vocab().size(), " tokens, ", tok.merges().size(), " merges");
    } else if (*encode) {
      const Tokenizer tok = LoadTokenizer(en_vocab);
      std::ofstream file;
      if (!en_output.empty()) file = OpenOut(en_output);
      std::ostream& sink = en_output.empty() ? out : file;
      for (const std::string& line : ReadLines(en_input)) {
        if (en_decode) {
          std::vector<int32_t> ids;
          std::istringstream fields(line);
          std::string field;
          while (fields >> field) {
            try {
              ids.push_back(std::stoi(field));
            } catch (const std::logic_error&) {
              throw DataError("not a token id: " + field);
            }
          }
          sink << tok.Decode(ids) << '\n';
        } else {
          const EncodedSequence seq = tok.Encode(line);
          for (size_t i = 0; i < seq.ids.size(); ++i) {
            sink << (i ? " " : "") << seq.ids[i];
          }
          sink << '\n';
        }
      }
    } else if (*pack) {
      const Tokenizer tok = LoadTokenizer(pk_vocab);
      BlockPacker packer(pk_max_len);
      std::vector<SequenceBlock> blocks;
      for (const std::string& line : ReadLines(pk_input)) {
        std::vector<SequenceBlock> done = packer.Push(tok.Encode(line));
        blocks.insert(blocks.end(), std::make_move_iterator(done.begin()),
                      std::make_move_iterator(done.end()));
      }
      if (std::optional<SequenceBlock> last = packer.Finish()) blocks.push_back(std::move(*last));
      fs::create_directories(pk_output_dir);
      const size_t per_shard =
          pk_blocks_per_shard == 0 ? std::max<size_t>(1, blocks.size()) : pk_blocks_per_shard;
      size_t n_shards = 0;
      for (size_t begin = 0; begin < blocks.size() || n_shards == 0; begin += per_shard) {
        Shard shard;
        shard.max_len = static_cast<uint32_t>(pk_max_len);
        shard.vocab_fingerprint = tok.vocab().Fingerprint();
        const size_t end = std::min(blocks.size(), begin + per_shard);
        shard.blocks.assign(blocks.begin() + begin, blocks.begin() + end);
        char name[32];
        std::snprintf(name, sizeof(name), "shard-%05zu.shard", n_shards++);
        WriteShard(fs::path(pk_output_dir) / name, shard);
        if (end == blocks.size()) break;
      }
      log(blocks.size(), " blocks in ", n_shards, " shard(s)");
      out << blocks.size() << '\n';
    } else if (*pretrain) {
      const Tokenizer tok = LoadTokenizer(pt_vocab);
      std::vector<Shard> shards;
      for (const fs::path& path : ExpandShardPaths(pt_shards)) {
        shards.push_back(ReadShard(path, tok.vocab().Fingerprint()));
        if (shards.back().max_len != shards.front().max_len) {
          throw DataError("shards have different block lengths");
        }
      }
      const TransformerConfig config =
          pt_model.Build(tok.vocab().size(), shards.front().max_len);
      ModelParams<float> params = InitParams<float>(config, g.seed);
      log("model: ", config.n_layers, " layers, hidden ", config.hidden_dim, ", ",
          ParamCount(config), " backbone parameters");
      fs::create_directories(pt_output_dir);
      std::ofstream metrics = OpenOut(fs::path(pt_output_dir) / "metrics.jsonl");
      pt.seed = g.seed;
      pt.threads = g.threads;
      pt.whole_word = !pt_token_masking;
      if (pt_max_steps) pt.max_steps = pt_max_steps;
      pt.checkpoint_dir = pt_output_dir;
      pt.metrics_log = &metrics;
      const PretrainResult result = Pretrain(std::move(params), shards, pt);
      log(result.steps, " steps, final loss ",
          result.losses.empty() ? 0.0 : result.losses.back());
    } else if (*finetune_cls) {
      std::vector<LabeledTweet> train, val;
      if (!fc_data.empty()) {
        std::ifstream in = OpenIn(fc_data);
        const std::vector<LabeledTweet> data = ParseLabeledTsv(in);
        std::vector<int32_t> labels;
        for (const LabeledTweet& t : data) labels.push_back(t.label);
        const SplitIndices split = StratifiedSplit(labels, {0.70, 0.15, 0.15}, g.seed);
        std::vector<LabeledTweet> test;
        for (size_t i : split.train) train.push_back(data[i]);
        for (size_t i : split.val) val.push_back(data[i]);
        for (size_t i : split.test) test.push_back(data[i]);
        const fs::path dir(fc.output_dir);
        {
          std::ofstream f = OpenOut(dir / "train.tsv");
          WriteLabeledTsv(f, train);
        }
        {
          std::ofstream f = OpenOut(dir / "val.tsv");
          WriteLabeledTsv(f, val);
        }
        {
          std::ofstream f = OpenOut(dir / "test.tsv");
          WriteLabeledTsv(f, test);
        }
        log("split ", train.size(), "/", val.size(), "/", test.size());
      } else if (!fc_train.empty() && !fc_val.empty()) {
        std::ifstream tin = OpenIn(fc_train);
        train = ParseLabeledTsv(tin);
        std::ifstream vin = OpenIn(fc_val);
        val = ParseLabeledTsv(vin);
      } else {
        err << "error: finetune-cls needs --data or both --train and --val\n";
        return kUsage;
      }
      const Tokenizer tok = LoadTokenizer(fc.vocab);
      ModelParams<float> params =
          LoadWithHead(fc.checkpoint, tok, {HeadKind::kSequenceCls, 2}, g.seed);
      std::vector<ClsExample> train_ex, val_ex;
      for (const LabeledTweet& t : train) {
        train_ex.push_back(MakeClsExample(tok, t, params.config.max_len));
      }
      for (const LabeledTweet& t : val) {
        val_ex.push_back(MakeClsExample(tok, t, params.config.max_len));
      }
      fs::create_directories(fc.output_dir);
      std::ofstream metrics = OpenOut(fs::path(fc.output_dir) / "metrics.jsonl");
      const FinetuneResult result =
          FinetuneSequenceCls(std::move(params), train_ex, val_ex, fc.Build(g, &metrics));
      WriteFinetuneSummary(fc.output_dir, result);
      log("best epoch ", result.best_epoch, ", validation F1 ", result.best_metric);
    } else if (*finetune_ner) {
      const std::vector<std::string> tags = BioTagSet(CapEntityTypes());
      std::ifstream tin = OpenIn(fn_train);
      std::vector<ConllDocument> train = ParseConll(tin);
      std::vector<ConllDocument> val;
      if (!fn_val.empty()) {
        std::ifstream vin = OpenIn(fn_val);
        val = ParseConll(vin);
      } else {
        const SplitIndices split = HoldoutSplit(train.size(), fn_holdout, g.seed);
        std::vector<ConllDocument> kept;
        for (size_t i : split.train) kept.push_back(train[i]);
        for (size_t i : split.val) val.push_back(train[i]);
        train = std::move(kept);
        log("held out ", val.size(), " of ", train.size() + val.size(), " documents");
      }
      const Tokenizer tok = LoadTokenizer(fn.vocab);
      ModelParams<float> params =
          LoadWithHead(fn.checkpoint, tok, {HeadKind::kTokenCls, tags.size()}, g.seed);
      std::vector<TokenClsExample> train_ex, val_ex;
      for (const ConllDocument& d : train) {
        train_ex.push_back(MakeTokenClsExample(tok, d, tags, params.config.max_len));
      }
      for (const ConllDocument& d : val) {
        val_ex.push_back(MakeTokenClsExample(tok, d, tags, params.config.max_len));
      }
      fs::create_directories(fn.output_dir);
      std::ofstream metrics = OpenOut(fs::path(fn.output_dir) / "metrics.jsonl");
      const FinetuneResult result =
          FinetuneTokenCls(std::move(params), train_ex, val_ex, tags, fn.Build(g, &metrics));
      WriteFinetuneSummary(fn.output_dir, result);
      log("best epoch ", result.best_epoch, ", validation micro-F1 ", result.best_metric);
    } else if (*eval) {
      const Tokenizer tok = LoadTokenizer(ev_vocab);
      const ModelParams<float> params = LoadCheckpoint(ev_checkpoint);
      if (params.config.vocab_size != tok.vocab().size()) {
        throw DataError("checkpoint and tokenizer vocabularies differ");
      }
      MetricsReport report;
      std::ifstream in = OpenIn(ev_data);
      if (ev_task == "cls") {
        const std::vector<LabeledTweet> data = ParseLabeledTsv(in);
        std::vector<EncodedSequence> inputs;
        std::vector<int32_t> gold;
        for (const LabeledTweet& t : data) {
          inputs.push_back(MakeClsExample(tok, t, params.config.max_len).input);
          gold.push_back(t.label);
        }
        report = BinaryClsMetrics(gold, PredictSequenceCls(params, inputs));
      } else {
        const std::vector<std::string> tags = BioTagSet(CapEntityTypes());
        const std::vector<ConllDocument> gold = ParseConll(in);
        std::vector<EncodedSequence> inputs;
        for (const ConllDocument& d : gold) {
          inputs.push_back(MakeTokenClsExample(tok, d, tags, params.config.max_len).input);
        }
        const auto pred_ids = PredictTokenCls(params, inputs);
        std::vector<ConllDocument> pred;
        for (size_t i = 0; i < gold.size(); ++i) {
          ConllDocument doc{gold[i].tokens, {}};
          for (int32_t id : pred_ids[i]) doc.tags.push_back(tags.at(id));
          // Words cut off by max_len are predicted as O.
          doc.tags.resize(doc.tokens.size(), "O");
          pred.push_back(std::move(doc));
        }
        report = EntityPrf(gold, pred);
      }
      const std::string json = MetricsReportToJson(report);
      if (ev_output.empty()) {
        out << json << '\n';
      } else {
        OpenOut(ev_output) << json << '\n';
      }
    } else if (*stats) {
      StatsAccumulator acc;
      for (const std::string& line : ReadLines(st_input)) {
        acc.Add(NormalizedTweet{line, CountWsTokens(line)});
      }
      out << CorpusStatsToJson(acc.Finish()) << '\n';
    } else if (*estimate) {
      const uint64_t blocks = EstimateBlockCount(es_tweets, es_mean_tokens, es_max_len);
      out << blocks << '\n';
      if (es_epochs != 0 || es_batch != 0) {
        out << EstimateTrainingSteps(blocks, es_epochs, es_batch) << '\n';
      }
    } else if (*synth) {
      std::ofstream sink = OpenOut(sy_output);
      if (sy_kind == "tweets") {
        for (const RawTweet& t : SyntheticTweets(sy_n, g.seed)) {
          nlohmann::ordered_json line = {{"id", t.id}, {"text", t.text}};
          if (t.lang) line["lang"] = *t.lang;
          sink << line.dump() << '\n';
        }
      } else if (sy_kind == "cycle") {
        for (const std::string& s : CycleSentences(sy_n, g.seed)) sink << s << '\n';
      } else if (sy_kind == "theme") {
        for (const std::string& s : ThemeSentences(sy_n, g.seed)) sink << s << '\n';
      } else if (sy_kind == "offensive") {
        WriteLabeledTsv(sink, SyntheticOffensiveSet(sy_n, sy_positive, g.seed));
      } else {
        WriteConll(sink, SyntheticNerDocs(sy_n, g.seed));
      }
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::ios_base::failure& e) {
    err << "i/o error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::out_of_range& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"tweetlm"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return Run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tweetlm::cli
