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


#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tweetlm/blocks.h"
#include "tweetlm/error.h"
#include "tweetlm/rng.h"
#include "tweetlm/tokenizer.h"

namespace tweetlm {
namespace {

namespace fs = std::filesystem;

EncodedSequence Words(size_t n, int32_t first_id = kNumSpecials) {
  EncodedSequence seq;
  for (size_t i = 0; i < n; ++i) {
    seq.ids.push_back(first_id + static_cast<int32_t>(i % 50));
    seq.word_start.push_back(1);
  }
  return seq;
}

SequenceBlock MakeBlock(std::vector<int32_t> ids, std::vector<uint8_t> word_start,
                        size_t max_len, uint64_t block_id = 0) {
  SequenceBlock b;
  b.block_id = block_id;
  b.attention_len = static_cast<uint32_t>(ids.size());
  b.ids = std::move(ids);
  b.word_start = std::move(word_start);
  b.ids.resize(max_len, kPadId);
  b.word_start.resize(max_len, 0);
  return b;
}

SequenceBlock RandomBlock(Rng& rng, size_t max_len, size_t vocab, uint64_t block_id) {
  std::vector<int32_t> ids;
  std::vector<uint8_t> ws;
  const size_t n = 1 + rng.UniformInt(max_len);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t r = rng.UniformInt(10);
    int32_t id;
    if (r == 0) {
      id = static_cast<int32_t>(rng.UniformInt(kNumSpecials));
      if (id == kPadId) id = kBosId;
    } else {
      id = kNumSpecials + static_cast<int32_t>(rng.UniformInt(vocab - kNumSpecials));
    }
    ids.push_back(id);
    ws.push_back(IsMaskable(id) ? static_cast<uint8_t>(rng.UniformInt(2)) : 0);
  }
  return MakeBlock(ids, ws, max_len, block_id);
}

fs::path TempPath(const std::string& name) {
  return fs::temp_directory_path() / ("tweetlm_blocks_" + name);
}

TEST(PackTest, TwoSixtyTokenTweetsShareOneBlock) {
  const std::vector<EncodedSequence> seqs = {Words(60), Words(60, 20)};
  const std::vector<SequenceBlock> blocks = PackBlocks(seqs, 128);
  ASSERT_EQ(blocks.size(), 1u);
  // <s> 60 </s> <s> 60 </s>
  EXPECT_EQ(blocks[0].attention_len, 124u);
  EXPECT_EQ(blocks[0].ids[0], kBosId);
  EXPECT_EQ(blocks[0].ids[61], kEosId);
  EXPECT_EQ(blocks[0].ids[62], kBosId);
  EXPECT_EQ(blocks[0].ids[123], kEosId);
  EXPECT_EQ(blocks[0].ids[124], kPadId);
  EXPECT_EQ(blocks[0].ids.size(), 128u);
}

TEST(PackTest, FullLengthTweetSpansTwoBlocks) {
  const std::vector<EncodedSequence> seqs = {Words(128)};
  const std::vector<SequenceBlock> blocks = PackBlocks(seqs, 128);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].attention_len, 128u);
  EXPECT_EQ(blocks[1].attention_len, 2u);
  EXPECT_EQ(blocks[1].ids[1], kEosId);
  EXPECT_EQ(blocks[0].block_id, 0u);
  EXPECT_EQ(blocks[1].block_id, 1u);
}

TEST(PackTest, EmptyStream) {
  EXPECT_TRUE(PackBlocks({}, 128).empty());
}

TEST(PackTest, RejectsTinyMaxLen) {
  EXPECT_THROW(PackBlocks({}, 7), std::invalid_argument);
}

TEST(PackTest, ConservesTokensInOrder) {
  Rng rng(4);
  std::vector<EncodedSequence> seqs;
  std::vector<int32_t> expected;
  size_t total = 0;
  for (int i = 0; i < 300; ++i) {
    EncodedSequence s = Words(rng.UniformInt(40), kNumSpecials + static_cast<int32_t>(i % 7));
    total += s.size();
    expected.insert(expected.end(), s.ids.begin(), s.ids.end());
    seqs.push_back(std::move(s));
  }
  for (size_t max_len : {8, 16, 128}) {
    std::vector<int32_t> content;
    size_t padded = 0;
    const std::vector<SequenceBlock> blocks = PackBlocks(seqs, max_len);
    for (size_t b = 0; b < blocks.size(); ++b) {
      const SequenceBlock& block = blocks[b];
      ASSERT_EQ(block.ids.size(), max_len);
      ASSERT_EQ(block.word_start.size(), max_len);
      if (b + 1 < blocks.size()) ASSERT_EQ(block.attention_len, max_len);
      for (size_t i = 0; i < max_len; ++i) {
        if (i >= block.attention_len) {
          ASSERT_EQ(block.ids[i], kPadId);
          ++padded;
        } else if (!IsSpecialId(block.ids[i])) {
          content.push_back(block.ids[i]);
        }
      }
    }
    EXPECT_EQ(content.size(), total);
    EXPECT_EQ(content, expected);
    EXPECT_LT(padded, max_len);
  }
}

TEST(PackTest, StreamingMatchesBatch) {
  std::vector<EncodedSequence> seqs;
  for (size_t n : {3, 20, 0, 7, 31}) seqs.push_back(Words(n));
  BlockPacker packer(16, 100);
  std::vector<SequenceBlock> streamed;
  for (const EncodedSequence& s : seqs) {
    for (SequenceBlock& b : packer.Push(s)) streamed.push_back(std::move(b));
  }
  if (auto last = packer.Finish()) streamed.push_back(std::move(*last));
  std::vector<SequenceBlock> batch = PackBlocks(seqs, 16);
  ASSERT_EQ(streamed.size(), batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(streamed[i].block_id, 100 + i);
    streamed[i].block_id = batch[i].block_id;
    EXPECT_EQ(streamed[i], batch[i]);
  }
}

TEST(EstimateTest, BlockCount) {
  EXPECT_EQ(EstimateBlockCount(226000000, 30, 128), 52968750u);
  EXPECT_EQ(EstimateBlockCount(1, 128, 128), 1u);
  EXPECT_EQ(EstimateBlockCount(1000, 30, 128), 234u);
}

TEST(EstimateTest, TrainingSteps) {
  EXPECT_EQ(EstimateTrainingSteps(53000000, 20, 1280), 828125u);
  EXPECT_EQ(EstimateTrainingSteps(1280, 1, 1280), 1u);
  EXPECT_EQ(EstimateTrainingSteps(10000, 3, 32), 937u);
}

TEST(WholeWordTest, Examples) {
  const SequenceBlock b = MakeBlock({10, 11, 12}, {1, 0, 1}, 8);
  EXPECT_EQ(WholeWordGroups(b), (std::vector<std::vector<uint32_t>>{{0, 1}, {2}}));
  const SequenceBlock all = MakeBlock({10, 11, 12}, {1, 1, 1}, 8);
  EXPECT_EQ(WholeWordGroups(all), (std::vector<std::vector<uint32_t>>{{0}, {1}, {2}}));
}

TEST(WholeWordTest, SpecialsAndLeadingContinuation) {
  // A block that starts mid-word, then </s> <s> @USER and a two-piece word.
  const SequenceBlock b =
      MakeBlock({20, 21, kEosId, kBosId, kUserId, 30, 31}, {0, 0, 0, 0, 1, 1, 0}, 8);
  EXPECT_EQ(WholeWordGroups(b), (std::vector<std::vector<uint32_t>>{{0, 1}, {5, 6}}));
}

TEST(WholeWordTest, GroupsMatchDecodedWords) {
  BpeTrainOptions options;
  options.vocab_size = 40;
  const Tokenizer tok = TrainBpe(std::vector<std::string>{"bonjour tout le monde",
                                                          "le monde est grand"},
                                 options);
  const std::string text = "bonjour le grand monde tout";
  const std::vector<SequenceBlock> blocks = PackBlocks(std::vector{tok.Encode(text)}, 64);
  ASSERT_EQ(blocks.size(), 1u);
  std::vector<std::string> words;
  for (const auto& group : WholeWordGroups(blocks[0])) {
    std::vector<int32_t> ids;
    for (uint32_t p : group) ids.push_back(blocks[0].ids[p]);
    std::string w = tok.Decode(ids);
    words.push_back(w.substr(w.find_first_not_of(' ')));
  }
  EXPECT_EQ(words, (std::vector<std::string>{"bonjour", "le", "grand", "monde", "tout"}));
}

TEST(MaskingRatesTest, Validation) {
  MaskingRates ok;
  EXPECT_NO_THROW(ok.Validate());
  MaskingRates r = ok;
  r.select = 0.0;
  EXPECT_THROW(r.Validate(), std::invalid_argument);
  r = ok;
  r.select = 1.0;
  EXPECT_NO_THROW(r.Validate());
  r = ok;
  r.mask = 0.7;
  EXPECT_THROW(r.Validate(), std::invalid_argument);
  r = ok;
  r.random = -0.1;
  r.mask = 1.0;
  EXPECT_THROW(r.Validate(), std::invalid_argument);
}

TEST(MaskingTest, SelectAllMaskAll) {
  Rng rng(1);
  MaskingRates rates{1.0, 1.0, 0.0, 0.0};
  for (uint64_t id = 0; id < 50; ++id) {
    const SequenceBlock b = RandomBlock(rng, 32, 100, id);
    for (bool whole_word : {false, true}) {
      const MaskedExample ex = SampleMasking(b, 3, 0, rates, whole_word, 100);
      for (size_t i = 0; i < b.ids.size(); ++i) {
        const bool maskable = i < b.attention_len && IsMaskable(b.ids[i]);
        ASSERT_EQ(ex.input_ids[i], maskable ? kMaskId : b.ids[i]);
        ASSERT_EQ(ex.labels[i], maskable ? b.ids[i] : kIgnoreLabel);
      }
    }
  }
}

TEST(MaskingTest, DeterministicButEpochDependent) {
  Rng rng(2);
  const SequenceBlock b = RandomBlock(rng, 128, 1000, 17);
  const MaskingRates rates;
  EXPECT_EQ(SampleMasking(b, 5, 2, rates, true, 1000), SampleMasking(b, 5, 2, rates, true, 1000));
  EXPECT_NE(SampleMasking(b, 5, 2, rates, false, 1000).selected_positions,
            SampleMasking(b, 5, 3, rates, false, 1000).selected_positions);
}

TEST(MaskingTest, SoundnessProperties) {
  Rng rng(3);
  const MaskingRates rates;
  for (uint64_t id = 0; id < 300; ++id) {
    const SequenceBlock b = RandomBlock(rng, 64, 500, id);
    const bool whole_word = id % 2 == 0;
    const MaskedExample ex = SampleMasking(b, 11, id % 5, rates, whole_word, 500);
    ASSERT_EQ(ex.attention_len, b.attention_len);
    std::set<uint32_t> selected(ex.selected_positions.begin(), ex.selected_positions.end());
    ASSERT_EQ(selected.size(), ex.selected_positions.size());
    std::vector<int32_t> restored = ex.input_ids;
    for (size_t i = 0; i < b.ids.size(); ++i) {
      if (selected.count(static_cast<uint32_t>(i))) {
        // Special-token immunity.
        ASSERT_LT(i, b.attention_len);
        ASSERT_TRUE(IsMaskable(b.ids[i]));
        ASSERT_EQ(ex.labels[i], b.ids[i]);
        ASSERT_TRUE(ex.input_ids[i] == kMaskId || IsMaskable(ex.input_ids[i]));
        ASSERT_LT(ex.input_ids[i], 500);
        restored[i] = ex.labels[i];
      } else {
        ASSERT_EQ(ex.labels[i], kIgnoreLabel);
        ASSERT_EQ(ex.input_ids[i], b.ids[i]);
      }
    }
    // Label soundness: writing labels back reproduces the block.
    ASSERT_EQ(restored, b.ids);
    if (whole_word) {
      for (const auto& group : WholeWordGroups(b)) {
        const size_t hit = std::count_if(group.begin(), group.end(),
                                         [&](uint32_t p) { return selected.count(p) > 0; });
        ASSERT_TRUE(hit == 0 || hit == group.size());
      }
    }
  }
}

TEST(MaskingTest, NothingMaskable) {
  const SequenceBlock b = MakeBlock({kBosId, kUserId, kUrlId, kUnkId, kEosId}, {0, 1, 1, 1, 0}, 8);
  const MaskedExample ex = SampleMasking(b, 1, 0, MaskingRates{1.0, 1.0, 0.0, 0.0}, true, 50);
  EXPECT_TRUE(ex.selected_positions.empty());
  EXPECT_EQ(ex.input_ids, b.ids);
}

TEST(ShardTest, RoundTrip) {
  Rng rng(5);
  Shard shard;
  shard.max_len = 16;
  shard.vocab_fingerprint = 0x1234abcdULL;
  for (uint64_t id = 0; id < 20; ++id) shard.blocks.push_back(RandomBlock(rng, 16, 300, id));
  const fs::path path = TempPath("roundtrip.shard");
  WriteShard(path, shard);
  const Shard back = ReadShard(path, 0x1234abcdULL);
  EXPECT_EQ(back.max_len, shard.max_len);
  EXPECT_EQ(back.vocab_fingerprint, shard.vocab_fingerprint);
  EXPECT_EQ(back.blocks, shard.blocks);
  fs::remove(path);
}

TEST(ShardTest, RejectsMismatchAndCorruption) {
  Rng rng(6);
  Shard shard;
  shard.max_len = 8;
  shard.vocab_fingerprint = 42;
  for (uint64_t id = 0; id < 3; ++id) shard.blocks.push_back(RandomBlock(rng, 8, 100, id));
  const fs::path path = TempPath("bad.shard");
  WriteShard(path, shard);
  EXPECT_THROW(ReadShard(path, 43), DataError);

  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 5);
  EXPECT_THROW(ReadShard(path), DataError);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOTASHARD-at-all-but-long-enough";
  }
  EXPECT_THROW(ReadShard(path), DataError);
  fs::remove(path);
}

}  // namespace
}  // namespace tweetlm
