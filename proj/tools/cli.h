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

#ifndef TWEETLM_TOOLS_CLI_H_
#define TWEETLM_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace tweetlm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

// Parses argv (argv[0] is the program name), runs the subcommand, and
// returns the process exit code. Data goes to `out`, logs and usage text to
// `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tweetlm::cli

#endif  // TWEETLM_TOOLS_CLI_H_
