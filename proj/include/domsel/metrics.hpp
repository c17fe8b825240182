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

// Corpus BLEU and subset diagnostics (vocabulary, OOV, overlap).

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "domsel/corpus.hpp"

namespace domsel::metrics {

using TokenLines = std::vector<std::vector<std::string>>;

struct BleuOptions {
  int max_n = 4;
  bool smooth = false;  // add-one on the precisions of orders above 1
};

struct BleuReport {
  std::vector<double> precisions;
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  double brevity_penalty = 0.0;
  double score = 0.0;
};

// Single-reference corpus BLEU with clipped counts and
// BP = min(1, exp(1 - r/c)). Hypothesis lines may be empty; reference lines
// may not.
BleuReport bleu(const TokenLines& hypotheses, const TokenLines& references, const BleuOptions& options = {});
BleuReport bleu(const corpus::Corpus& hypotheses, const corpus::Corpus& references, const BleuOptions& options = {});
TokenLines load_token_lines(const std::filesystem::path& path);

struct VocabStats {
  std::size_t tokens = 0;
  std::size_t types = 0;
  double ratio = 0.0;
};
VocabStats vocab_stats(const corpus::Corpus& corpus);

struct OovStats {
  std::size_t test_tokens = 0;
  std::size_t oov_tokens = 0;
  std::size_t test_types = 0;
  std::size_t oov_types = 0;
  double token_ratio = 0.0;
  double type_ratio = 0.0;
};
OovStats oov_stats(const corpus::Corpus& train, const corpus::Corpus& test);
// Token-level.
double oov_ratio(const corpus::Corpus& train, const corpus::Corpus& test);

struct OverlapStats {
  std::size_t intersection = 0;
  std::size_t union_size = 0;
  double overlap = 0.0;         // |intersection| / |union|
  std::vector<double> unique;   // per subset, share found in no other subset
};
OverlapStats overlap_stats(const std::vector<std::set<std::size_t>>& subsets);

// Method columns by metric rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
};
std::string format_tsv(const Table& table);
std::string format_aligned(const Table& table);

struct NamedSubset {
  std::string name;
  corpus::Corpus corpus;
  std::optional<std::set<std::size_t>> indices;  // positions in the shared source corpus
};

// Rows: tokens, types, type/token, optional oov (token and type), unique %,
// plus overlap % when every subset carries indices.
Table diagnostics_table(const std::vector<NamedSubset>& subsets, const corpus::Corpus* test = nullptr);

}  // namespace domsel::metrics
