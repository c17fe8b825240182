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

// Combining the outputs of several selection criteria: a weighted
// corpus-level union, a round-robin rank merge, mixture LMs over per-source
// sets, and linear interpolation of phrase-table style score tables.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "domsel/corpus.hpp"
#include "domsel/lm.hpp"
#include "domsel/select.hpp"

namespace domsel::combine {

struct WeightedEntry {
  std::size_t index = 0;
  double weight = 0.0;
  std::vector<std::string> provenance;  // labels in selection order
};

struct WeightedCorpus {
  std::vector<WeightedEntry> entries;  // ascending index
  std::vector<std::string> labels;     // one per input selection
};

// Labels are the selections' criteria, suffixed with #j when repeated.
// Entries whose summed weight is 0 are dropped.
WeightedCorpus combine_corpus_weighted(const std::vector<select::SelectionResult>& selections,
                                       std::span<const double> weights);

// `weight<TAB>label,label<TAB>text` per entry, text taken from `source`.
std::string format_weighted(const WeightedCorpus& wc, const corpus::Corpus& source);
std::string format_weighted(const WeightedCorpus& wc, const corpus::ParallelCorpus& source);
// Each entry repeated round(weight) times, at least once.
corpus::Corpus replicate(const WeightedCorpus& wc, const corpus::Corpus& source);
corpus::ParallelCorpus replicate(const WeightedCorpus& wc, const corpus::ParallelCorpus& source);

// Round-robin over rank positions in list order, keeping first occurrences,
// until `target_size` distinct items are collected.
std::vector<std::size_t> combine_naive_rank(const std::vector<std::vector<std::size_t>>& lists,
                                            std::size_t target_size);
// Same traversal; each kept item is credited to the list that reached it
// first. The union of the parts equals combine_naive_rank's output.
std::vector<std::vector<std::size_t>> partition_naive_rank(const std::vector<std::vector<std::size_t>>& lists,
                                                           std::size_t target_size);

struct MixtureResult {
  std::shared_ptr<lm::MixtureModel> model;
  lm::InterpolationTrace trace;
};

// One LM per set, mixed with EM-fitted weights on `dev`.
MixtureResult combine_advanced_lm(const std::vector<corpus::Corpus>& sets, const corpus::Corpus& dev,
                                  int order, lm::Smoothing smoothing = lm::Smoothing::modified_kneser_ney,
                                  const lm::InterpolationOptions& options = {});

struct ProbTable {
  std::size_t arity = 0;
  std::map<std::pair<std::string, std::string>, std::vector<double>> rows;
};

// `source ||| target ||| s1 ... sk [||| ignored ...]` per line.
ProbTable parse_prob_table(std::string_view text);
ProbTable load_prob_table(const std::filesystem::path& path);
std::string format_prob_table(const ProbTable& table);

// Weights are normalized to sum to 1; a missing row contributes 0.
ProbTable interpolate_tables(const std::vector<ProbTable>& tables, std::span<const double> weights);
// column_weights[c] weights the tables for score column c.
ProbTable interpolate_tables(const std::vector<ProbTable>& tables,
                             const std::vector<std::vector<double>>& column_weights);

}  // namespace domsel::combine
