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

#ifndef TWEETLM_BLOCKS_H_
#define TWEETLM_BLOCKS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tweetlm/tokenizer.h"

namespace tweetlm {

inline constexpr size_t kDefaultMaxLen = 128;
inline constexpr int32_t kIgnoreLabel = -100;

// Fixed-width token block. ids and word_start always have max_len entries;
// positions at or past attention_len hold <pad>.
struct SequenceBlock {
  uint64_t block_id = 0;
  std::vector<int32_t> ids;
  std::vector<uint8_t> word_start;
  uint32_t attention_len = 0;

  bool operator==(const SequenceBlock&) const = default;
};

struct MaskingRates {
  double select = 0.15;
  double mask = 0.80;
  double random = 0.10;
  double keep = 0.10;

  // Throws std::invalid_argument unless 0 < select <= 1, each of
  // mask/random/keep is in [0, 1] and they sum to 1 (within 1e-9, the
  // tolerance a decimal literal such as 0.8 + 0.1 + 0.1 needs).
  void Validate() const;
};

struct MaskedExample {
  std::vector<int32_t> input_ids;
  std::vector<int32_t> labels;
  std::vector<uint32_t> selected_positions;
  uint32_t attention_len = 0;

  bool operator==(const MaskedExample&) const = default;
};

// Concatenates encoded tweets as <s> t1 </s> <s> t2 </s> ... and cuts the
// stream into blocks of exactly max_len tokens. Block ids count from
// first_block_id.
class BlockPacker {
 public:
  explicit BlockPacker(size_t max_len = kDefaultMaxLen,
                       uint64_t first_block_id = 0);

  // Blocks completed by this sequence (possibly none).
  std::vector<SequenceBlock> Push(const EncodedSequence& seq);
  // The pending partial block, padded; nullopt if nothing is pending.
  std::optional<SequenceBlock> Finish();

  size_t max_len() const { return max_len_; }

 private:
  void Append(int32_t id, uint8_t word_start, std::vector<SequenceBlock>& out);
  SequenceBlock TakePending();

  size_t max_len_;
  uint64_t next_id_;
  std::vector<int32_t> ids_;
  std::vector<uint8_t> word_start_;
};

// Throws std::invalid_argument if max_len < 8.
std::vector<SequenceBlock> PackBlocks(std::span<const EncodedSequence> seqs,
                                      size_t max_len = kDefaultMaxLen);

// floor(n_tweets * mean_tokens / max_len).
uint64_t EstimateBlockCount(uint64_t n_tweets, double mean_tokens,
                            uint64_t max_len);

// floor(n_blocks * epochs / batch_size).
uint64_t EstimateTrainingSteps(uint64_t n_blocks, uint64_t epochs,
                               uint64_t batch_size);

// Maskable = not a special id (<pad>, <unk>, <s>, </s>, <mask>, @USER,
// HTTPURL).
constexpr bool IsMaskable(int32_t id) { return !IsSpecialId(id); }

// Partition of the maskable positions within attention_len into word groups:
// a word_start position followed by its continuation positions. A leading
// continuation run (a word cut by a block boundary) forms its own group.
std::vector<std::vector<uint32_t>> WholeWordGroups(const SequenceBlock& block);

// Dynamic MLM masking, deterministic in (global_seed, block_id, epoch).
// Selection units are word groups when whole_word is set, single maskable
// positions otherwise. Each unit is selected with probability rates.select;
// each selected token becomes <mask>, a uniform non-special token from
// [kNumSpecials, vocab_size), or stays unchanged, with probabilities
// mask/random/keep.
MaskedExample SampleMasking(const SequenceBlock& block, uint64_t global_seed,
                            uint64_t epoch, const MaskingRates& rates,
                            bool whole_word, size_t vocab_size);

// In-memory image of a shard file.
struct Shard {
  uint32_t max_len = 0;
  uint64_t vocab_fingerprint = 0;
  std::vector<SequenceBlock> blocks;
};

// Binary layout, little-endian:
//   magic "TWLMSHRD" | u32 version | u32 max_len | u64 vocab fingerprint |
//   u64 n_blocks | n_blocks x (u64 block_id | u32 attention_len |
//   max_len x i32 ids | max_len x u8 word_start)
void WriteShard(const std::filesystem::path& path, const Shard& shard);

// Throws DataError on a bad magic/version, truncation, or a fingerprint
// different from expected_fingerprint when one is given.
Shard ReadShard(const std::filesystem::path& path,
                std::optional<uint64_t> expected_fingerprint = std::nullopt);

}  // namespace tweetlm

#endif  // TWEETLM_BLOCKS_H_
