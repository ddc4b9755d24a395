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

#ifndef TWEETLM_RNG_H_
#define TWEETLM_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace tweetlm {

// One round of the splitmix64 finalizer.
uint64_t SplitMix64(uint64_t x);

// Stable, order-sensitive combination of seed components.
uint64_t MixSeed(uint64_t a, uint64_t b);
uint64_t MixSeed(uint64_t a, uint64_t b, uint64_t c);

// Module seed = mix(global_seed, fnv1a(tag)).
uint64_t DeriveSeed(uint64_t global_seed, std::string_view tag);

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

// Platform-stable random source. std::mt19937_64 output is fully specified
// by the standard, but the std:: distributions are not, so conversions to
// reals and bounded integers are done here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(SplitMix64(seed)) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);

  // Standard normal via Box-Muller.
  double Normal();

  // Normal(0, stddev) resampled until |x| <= 2 stddev.
  double TruncatedNormal(double stddev);

  template <typename It>
  void Shuffle(It first, It last) {
    const auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      const uint64_t j = UniformInt(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tweetlm

#endif  // TWEETLM_RNG_H_
