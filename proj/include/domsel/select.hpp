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

// Domain-relevance criteria over a general corpus and the rankings they
// induce.
//
//   cosine  tf-idf cosine against the in-domain corpus as one pseudo-document
//   ce      per-event cross-entropy under the in-domain LM
//   ml      ce(in) - ce(out)
//   mml     ml on the source side plus ml on the target side
//   fms     mean fuzzy-match score against every reference sentence
//
// Cross-entropies are normalized by the number of scored events (words plus
// the end-of-sentence event).

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "domsel/corpus.hpp"
#include "domsel/lm.hpp"

namespace domsel::select {

enum class Direction { higher_is_better, lower_is_better };
enum class Criterion { cosine, cross_entropy, moore_lewis, bilingual_moore_lewis, fms };
// online: a separate in-domain corpus is the reference; offline: the test set is.
enum class ReferenceMode { online, offline };

Criterion parse_criterion(std::string_view name);
std::string_view to_string(Criterion criterion);
Direction direction_of(Criterion criterion);
Direction parse_direction(std::string_view name);
std::string_view to_string(Direction direction);
ReferenceMode parse_reference_mode(std::string_view name);
std::string_view to_string(ReferenceMode mode);

using Provenance = std::map<std::string, std::string>;

struct CriterionScores {
  std::string criterion;
  Direction direction = Direction::higher_is_better;
  std::vector<double> scores;
  Provenance provenance;
};

struct SelectionResult {
  std::vector<std::size_t> ranked;  // best first
  std::string criterion;
  Direction direction = Direction::higher_is_better;
  Provenance provenance;
};

std::vector<double> score_cosine(const corpus::Corpus& general, const corpus::Corpus& in_domain,
                                 unsigned threads = 1);
std::vector<double> score_cross_entropy(const corpus::Corpus& general, const lm::LanguageModel& in_lm,
                                        unsigned threads = 1);
std::vector<double> score_moore_lewis(const corpus::Corpus& general, const lm::LanguageModel& in_lm,
                                      const lm::LanguageModel& out_lm, unsigned threads = 1);
std::vector<double> score_bilingual_ml(const corpus::ParallelCorpus& general,
                                       const lm::LanguageModel& in_src_lm,
                                       const lm::LanguageModel& out_src_lm,
                                       const lm::LanguageModel& in_tgt_lm,
                                       const lm::LanguageModel& out_tgt_lm, unsigned threads = 1);

// Word-level Levenshtein distance (unit insert, delete, substitute).
std::size_t word_edit_distance(std::span<const std::string> a, std::span<const std::string> b);
// 1 - distance / max(|a|, |b|), clamped to [0, 1].
double fuzzy_match_score(std::span<const std::string> a, std::span<const std::string> b);

struct FmsOptions {
  // Approximate mode: pairs whose length bound 1 - |la - lb| / max(la, lb)
  // is below `cutoff` contribute 0 without running the DP.
  bool fast = false;
  double cutoff = 0.0;
  unsigned threads = 1;
};

std::vector<double> score_fms(const corpus::Corpus& general, const corpus::Corpus& reference,
                              const FmsOptions& options = {});

// All indices, best first; ties keep corpus order.
std::vector<std::size_t> rank(std::span<const double> scores, Direction direction);

// Best floor(k/100 * n) sentences. k must lie in (0, 100] and select at least one.
SelectionResult select_top(const CriterionScores& scores, double k_percent);
// Sentences strictly better than theta, best first.
SelectionResult threshold_filter(const CriterionScores& scores, double theta);

// Seeded random subset of `size` sentences, kept in corpus order.
corpus::Corpus sample_subset(const corpus::Corpus& corpus, std::size_t size, std::uint64_t seed);

struct SelectionSetup {
  Criterion criterion = Criterion::moore_lewis;
  int order = 4;
  lm::Smoothing smoothing = lm::Smoothing::modified_kneser_ney;
  std::uint64_t seed = 1;
  ReferenceMode reference_mode = ReferenceMode::online;
  FmsOptions fms;
  unsigned threads = 1;
};

// Scores `general` against the reference corpus, training the LMs an LM
// criterion needs: the in-domain LM on the reference, the out-domain LM on a
// seeded random general subset of the reference's size, both over the
// reference vocabulary. bilingual_moore_lewis needs score_parallel.
CriterionScores score_corpus(const corpus::Corpus& general, const corpus::Corpus& reference,
                             const SelectionSetup& setup);
CriterionScores score_parallel(const corpus::ParallelCorpus& general,
                               const corpus::ParallelCorpus& reference, const SelectionSetup& setup);

// Projects both corpora through the factor view, scores the projection, and
// ranks the original sentences in the projected ranking order.
CriterionScores factored_scores(const corpus::Corpus& general, const corpus::Corpus& reference,
                                corpus::FactorView view, const SelectionSetup& setup);
CriterionScores factored_scores(const corpus::ParallelCorpus& general,
                                const corpus::ParallelCorpus& reference, corpus::FactorView view,
                                const SelectionSetup& setup);
SelectionResult factored_select(const corpus::Corpus& general, const corpus::Corpus& reference,
                                corpus::FactorView view, const SelectionSetup& setup,
                                double k_percent = 100.0);

// TSV `index<TAB>score` preceded by `# key=value` provenance lines.
std::string format_scores(const CriterionScores& scores);
CriterionScores parse_scores(std::string_view text);
CriterionScores load_scores(const std::filesystem::path& path);

// One index per line preceded by `# key=value` provenance lines.
std::string format_selection(const SelectionResult& selection);
SelectionResult parse_selection(std::string_view text);
SelectionResult load_selection(const std::filesystem::path& path);

}  // namespace domsel::select
