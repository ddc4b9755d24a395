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

#ifndef TWEETLM_CHECKPOINT_H_
#define TWEETLM_CHECKPOINT_H_

#include <filesystem>
#include <optional>

#include "tweetlm/model.h"

namespace tweetlm {

// Binary layout, little-endian:
//   magic "TWLMCKPT" | u32 version
//   config: u64 n_layers, hidden_dim, n_heads, ffn_dim, max_len, vocab_size |
//           f64 dropout_rate, layer_norm_eps
//   head:   u8 kind | u64 n_classes
//   u64 n_tensors, then per tensor:
//     u32 name length | name bytes | u32 rank | rank x u64 extents |
//     f32 data
void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelParams<float>& params);

// Throws DataError for corrupt or truncated files, tensors that do not match
// the layout implied by the stored config, or a stored config that differs
// from `expected` when given.
ModelParams<float> LoadCheckpoint(
    const std::filesystem::path& path,
    const std::optional<TransformerConfig>& expected = std::nullopt);

}  // namespace tweetlm

#endif  // TWEETLM_CHECKPOINT_H_
