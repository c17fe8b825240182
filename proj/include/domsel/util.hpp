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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace domsel {

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

// Parses a full-precision decimal as written by format_double. Throws
// DataError on malformed text.
double parse_double(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

bool is_valid_utf8(std::string_view text);

// First line of every file the command-line tool writes.
inline constexpr std::string_view kManifestHeader = "# manifest: ";

// Reads a UTF-8 text file into lines. A trailing CR on each line and a
// leading manifest header line are dropped. Throws DataError if the file is
// missing or contains invalid UTF-8.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

// Diagnostics go through a replaceable sink (stderr by default) so data
// streams stay clean.
void log_warning(std::string_view message);
void set_log_sink(std::function<void(std::string_view)> sink);
void reset_log_sink();

// Runs fn(begin, end) over contiguous shards of [0, n). Each index is visited
// exactly once; callers write results by index so output never depends on
// the thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t shards = std::min<std::size_t>(threads, n);
  const std::size_t step = (n + shards - 1) / shards;
  std::vector<std::exception_ptr> errors(shards);
  {
    std::vector<std::jthread> workers;
    workers.reserve(shards);
    std::size_t shard = 0;
    for (std::size_t begin = 0; begin < n; begin += step, ++shard) {
      const std::size_t end = std::min(n, begin + step);
      workers.emplace_back([&fn, &errors, shard, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[shard] = std::current_exception();
        }
      });
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

// Seeded generator with portable bounded draws; std distributions are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform real in [0, 1).
  double unit();

 private:
  std::mt19937_64 engine_;
};

// k distinct indices from [0, n) in ascending order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng);

}  // namespace domsel
