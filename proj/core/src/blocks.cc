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

#include "tweetlm/blocks.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "tweetlm/error.h"
#include "tweetlm/rng.h"

namespace tweetlm {
namespace {

static_assert(std::endian::native == std::endian::little,
              "shard I/O assumes a little-endian host");

constexpr char kShardMagic[8] = {'T', 'W', 'L', 'M', 'S', 'H', 'R', 'D'};
constexpr uint32_t kShardVersion = 1;

template <typename T>
void WritePod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void ReadPod(std::ifstream& in, T& value, const char* what) {
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw DataError(std::string("shard truncated while reading ") + what);
  }
}

}  // namespace

void MaskingRates::Validate() const {
  if (!(select > 0.0 && select <= 1.0)) {
    throw std::invalid_argument("masking select rate must be in (0, 1]");
  }
  for (double r : {mask, random, keep}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::invalid_argument("masking replacement rates must be in [0, 1]");
    }
  }
  if (std::abs(mask + random + keep - 1.0) > 1e-9) {
    throw std::invalid_argument("mask + random + keep must equal 1");
  }
}

BlockPacker::BlockPacker(size_t max_len, uint64_t first_block_id)
    : max_len_(max_len), next_id_(first_block_id) {
  if (max_len < 8) throw std::invalid_argument("max_len must be at least 8");
  ids_.reserve(max_len);
  word_start_.reserve(max_len);
}

SequenceBlock BlockPacker::TakePending() {
  SequenceBlock block;
  block.block_id = next_id_++;
  block.attention_len = static_cast<uint32_t>(ids_.size());
  block.ids = std::move(ids_);
  block.word_start = std::move(word_start_);
  block.ids.resize(max_len_, kPadId);
  block.word_start.resize(max_len_, 0);
  ids_.clear();
  word_start_.clear();
  ids_.reserve(max_len_);
  word_start_.reserve(max_len_);
  return block;
}

void BlockPacker::Append(int32_t id, uint8_t word_start,
                         std::vector<SequenceBlock>& out) {
  ids_.push_back(id);
  word_start_.push_back(word_start);
  if (ids_.size() == max_len_) out.push_back(TakePending());
}

std::vector<SequenceBlock> BlockPacker::Push(const EncodedSequence& seq) {
  std::vector<SequenceBlock> out;
  Append(kBosId, 0, out);
  for (size_t i = 0; i < seq.ids.size(); ++i) {
    Append(seq.ids[i], seq.word_start[i], out);
  }
  Append(kEosId, 0, out);
  return out;
}

std::optional<SequenceBlock> BlockPacker::Finish() {
  if (ids_.empty()) return std::nullopt;
  return TakePending();
}

std::vector<SequenceBlock> PackBlocks(std::span<const EncodedSequence> seqs,
                                      size_t max_len) {
  BlockPacker packer(max_len);
  std::vector<SequenceBlock> out;
  for (const EncodedSequence& seq : seqs) {
    for (SequenceBlock& block : packer.Push(seq)) out.push_back(std::move(block));
  }
  if (auto last = packer.Finish()) out.push_back(std::move(*last));
  return out;
}

uint64_t EstimateBlockCount(uint64_t n_tweets, double mean_tokens,
                            uint64_t max_len) {
  if (n_tweets == 0 || !(mean_tokens > 0.0) || max_len == 0) {
    throw std::invalid_argument("block estimate inputs must be positive");
  }
  return static_cast<uint64_t>(
      std::floor(static_cast<double>(n_tweets) * mean_tokens /
                 static_cast<double>(max_len)));
}

uint64_t EstimateTrainingSteps(uint64_t n_blocks, uint64_t epochs,
                               uint64_t batch_size) {
  if (n_blocks == 0 || epochs == 0 || batch_size == 0) {
    throw std::invalid_argument("step estimate inputs must be positive");
  }
  return n_blocks * epochs / batch_size;
}

std::vector<std::vector<uint32_t>> WholeWordGroups(const SequenceBlock& block) {
  std::vector<std::vector<uint32_t>> groups;
  bool open = false;
  for (uint32_t i = 0; i < block.attention_len; ++i) {
    if (!IsMaskable(block.ids[i])) {
      open = false;
      continue;
    }
    if (block.word_start[i] || !open) {
      groups.emplace_back();
      open = true;
    }
    groups.back().push_back(i);
  }
  return groups;
}

MaskedExample SampleMasking(const SequenceBlock& block, uint64_t global_seed,
                            uint64_t epoch, const MaskingRates& rates,
                            bool whole_word, size_t vocab_size) {
  rates.Validate();
  if (vocab_size <= static_cast<size_t>(kNumSpecials)) {
    throw std::invalid_argument("vocabulary has no non-special tokens");
  }
  MaskedExample ex;
  ex.input_ids = block.ids;
  ex.labels.assign(block.ids.size(), kIgnoreLabel);
  ex.attention_len = block.attention_len;

  std::vector<std::vector<uint32_t>> units;
  if (whole_word) {
    units = WholeWordGroups(block);
  } else {
    for (uint32_t i = 0; i < block.attention_len; ++i) {
      if (IsMaskable(block.ids[i])) units.push_back({i});
    }
  }

  Rng rng(MixSeed(global_seed, block.block_id, epoch));
  const uint64_t n_regular = vocab_size - kNumSpecials;
  for (const auto& unit : units) {
    if (!(rng.Uniform() < rates.select)) continue;
    for (uint32_t pos : unit) {
      ex.selected_positions.push_back(pos);
      ex.labels[pos] = block.ids[pos];
      const double r = rng.Uniform();
      if (r < rates.mask) {
        ex.input_ids[pos] = kMaskId;
      } else if (r < rates.mask + rates.random) {
        ex.input_ids[pos] =
            kNumSpecials + static_cast<int32_t>(rng.UniformInt(n_regular));
      }
    }
  }
  return ex;
}

void WriteShard(const std::filesystem::path& path, const Shard& shard) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  out.write(kShardMagic, sizeof(kShardMagic));
  WritePod(out, kShardVersion);
  WritePod(out, shard.max_len);
  WritePod(out, shard.vocab_fingerprint);
  WritePod(out, static_cast<uint64_t>(shard.blocks.size()));
  for (const SequenceBlock& block : shard.blocks) {
    if (block.ids.size() != shard.max_len ||
        block.word_start.size() != shard.max_len) {
      throw std::invalid_argument("block width differs from shard max_len");
    }
    WritePod(out, block.block_id);
    WritePod(out, block.attention_len);
    out.write(reinterpret_cast<const char*>(block.ids.data()),
              static_cast<std::streamsize>(block.ids.size() * sizeof(int32_t)));
    out.write(reinterpret_cast<const char*>(block.word_start.data()),
              static_cast<std::streamsize>(block.word_start.size()));
  }
  if (!out) throw std::ios_base::failure("failed to write " + path.string());
}

Shard ReadShard(const std::filesystem::path& path,
                std::optional<uint64_t> expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  char magic[sizeof(kShardMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      !std::equal(magic, magic + sizeof(magic), kShardMagic)) {
    throw DataError(path.string() + " is not a tweetlm shard");
  }
  uint32_t version = 0;
  ReadPod(in, version, "version");
  if (version != kShardVersion) {
    throw DataError("unsupported shard version " + std::to_string(version));
  }
  Shard shard;
  uint64_t n_blocks = 0;
  ReadPod(in, shard.max_len, "max_len");
  ReadPod(in, shard.vocab_fingerprint, "vocab fingerprint");
  ReadPod(in, n_blocks, "block count");
  if (expected_fingerprint && *expected_fingerprint != shard.vocab_fingerprint) {
    throw DataError(path.string() + " was packed with a different vocabulary");
  }
  if (shard.max_len < 8) throw DataError("shard max_len below 8");
  shard.blocks.reserve(n_blocks);
  for (uint64_t b = 0; b < n_blocks; ++b) {
    SequenceBlock block;
    ReadPod(in, block.block_id, "block id");
    ReadPod(in, block.attention_len, "attention length");
    if (block.attention_len > shard.max_len) {
      throw DataError("block attention_len exceeds max_len");
    }
    block.ids.resize(shard.max_len);
    block.word_start.resize(shard.max_len);
    if (!in.read(reinterpret_cast<char*>(block.ids.data()),
                 static_cast<std::streamsize>(shard.max_len * sizeof(int32_t))) ||
        !in.read(reinterpret_cast<char*>(block.word_start.data()),
                 static_cast<std::streamsize>(shard.max_len))) {
      throw DataError("shard truncated in block " + std::to_string(b));
    }
    shard.blocks.push_back(std::move(block));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("trailing bytes after " + std::to_string(n_blocks) +
                    " blocks");
  }
  return shard;
}

}  // namespace tweetlm
