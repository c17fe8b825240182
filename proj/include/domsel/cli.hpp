// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The domsel command-line tool. Every run writes one output file, whose first
// line names its manifest, and a `<output>.manifest` key-value file beside it.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace domsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

// `args` excludes the program name. Usage and log messages go to `err`;
// `out` only receives --help text.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

std::string sha256_hex(std::string_view data);
// Files hash their bytes; directories hash the sorted list of
// (relative path, file digest) pairs.
std::string digest_path(const std::filesystem::path& path);

}  // namespace domsel::cli
