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

#ifndef TWEETLM_UTF8_H_
#define TWEETLM_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace tweetlm {

// Splits `text` into one string per code point. Invalid or truncated
// sequences are emitted byte by byte so that concatenating the pieces always
// reproduces the input.
std::vector<std::string> SplitCodePoints(std::string_view text);

// ASCII whitespace: space, \t, \n, \v, \f, \r.
constexpr bool IsAsciiSpace(char c) {
  return c == ' ' || (c >= '\t' && c <= '\r');
}

// Maximal runs of non-whitespace bytes.
std::vector<std::string_view> SplitWhitespace(std::string_view text);

}  // namespace tweetlm

#endif  // TWEETLM_UTF8_H_
