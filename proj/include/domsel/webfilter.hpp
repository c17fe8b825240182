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

// Filtering harvested documents: topic relevance over located text,
// sentence perplexity, and the document-then-sentence combined filter.

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "domsel/corpus.hpp"
#include "domsel/lm.hpp"

namespace domsel::webfilter {

enum class Location { title = 0, headings = 1, metadata = 2, body = 3 };
inline constexpr std::size_t kLocationCount = 4;
std::string_view to_string(Location location);

struct TopicTerm {
  std::vector<std::string> tokens;
  double weight = 0.0;
  std::string topic_class;
};

struct TopicDefinition {
  std::vector<TopicTerm> terms;
};

// Number of tokens in the term.
double default_term_weight(std::string_view term);

// TSV `term<TAB>weight<TAB>class`; weight and class are optional, a blank
// weight means the default. `#` starts a comment line.
TopicDefinition parse_topics(std::string_view text);
TopicDefinition load_topics(const std::filesystem::path& path);

struct LocatedDocument {
  std::string id;
  // Per location, one token list per non-empty line.
  std::array<std::vector<std::vector<std::string>>, kLocationCount> lines;
};

// Lines after `#title`, `#headings`, `#metadata` or `#body` belong to that
// location; text before any marker is body. Throws DataError if empty.
LocatedDocument parse_located_document(std::string id, std::string_view text);
// Several documents, each introduced by a `#doc ID` line. Text without any
// `#doc` line is a single document named `default_id`.
std::vector<LocatedDocument> parse_located_collection(std::string_view text, const std::string& default_id = "doc");
// A directory (one document per file, id = file name) or a single file.
std::vector<LocatedDocument> load_located_collection(const std::filesystem::path& path);

struct LocationWeights {
  std::array<double, kLocationCount> w{10.0, 4.0, 2.0, 1.0};
};

// Overlapping occurrences of `term` as a contiguous run of `line`.
std::size_t count_occurrences(const std::vector<std::string>& line, const std::vector<std::string>& term);

// sum_i sum_j n_ij * w_i^t * w_j^l
double topic_relevance(const LocatedDocument& doc, const TopicDefinition& topic, const LocationWeights& weights = {});
std::vector<double> topic_relevance(const std::vector<LocatedDocument>& docs, const TopicDefinition& topic,
                                    const LocationWeights& weights = {}, unsigned threads = 1);

// Best floor(k/100 * n) documents by score, ties by smaller id. Returns
// indices into `docs`, best first.
std::vector<std::size_t> filter_documents_topk(const std::vector<LocatedDocument>& docs,
                                               const std::vector<double>& scores, double k_percent);

// 10^(-log10 P / W) with the end-of-sentence event in P and W = word count.
double ppl1(const lm::LanguageModel& model, const corpus::Sentence& sentence);

struct FilteredSentence {
  std::string doc_id;
  std::size_t line = 0;  // position among the document's body lines
  corpus::Sentence sentence;
  double ppl1 = 0.0;
};

// Body lines of `docs` ranked ascending by ppl1, ties in input order; the
// best floor(n/100 * count) are kept.
std::vector<FilteredSentence> rank_sentences_by_ppl1(const std::vector<const LocatedDocument*>& docs,
                                                     const lm::LanguageModel& model, double n_percent,
                                                     unsigned threads = 1);

// Top-K% documents by topic relevance, then top-N% of their body lines by ppl1.
std::vector<FilteredSentence> combined_filter(const std::vector<LocatedDocument>& docs, const TopicDefinition& topic,
                                              const LocationWeights& weights, double k_percent, double n_percent,
                                              const lm::LanguageModel& model, unsigned threads = 1);

}  // namespace domsel::webfilter
