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

// Query-by-document retrieval over a comparable collection. Source documents
// are expected in the collection's language already (translated upstream).
//
// Query terms are weighted P(w,d) = f(w,d) * ln(|D| / f(w,D)), or f(w,d)
// for terms the index has never seen. Documents are scored as
//
//   coord(q,d) * sum_t sqrt(f(t,d)) * (1 + ln(|D| / (df(t) + 1))) / sqrt(|d|)

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "domsel/corpus.hpp"

namespace domsel::retrieve {

struct Document {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t length() const { return tokens.size(); }
};

// Whitespace-tokenized; throws DataError for an empty document.
Document make_document(std::string id, std::string_view text);

class DocumentIndex {
 public:
  explicit DocumentIndex(std::vector<Document> docs);

  std::size_t size() const { return docs_.size(); }
  const Document& doc(std::size_t i) const { return docs_.at(i); }
  const std::vector<Document>& docs() const { return docs_; }
  std::size_t df(const std::string& term) const;
  std::size_t tf(std::size_t doc, const std::string& term) const;
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> df_;
  std::vector<std::unordered_map<std::string, std::size_t>> tf_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct QueryTerm {
  std::string term;
  double weight = 0.0;
};

struct Query {
  std::vector<QueryTerm> terms;  // weight descending, ties by term
  std::size_t size = 0;          // ceil(lambda * Len_d); terms may be fewer
};

using Stopwords = std::set<std::string>;

// lambda in (0, 1].
Query generate_query(const Document& doc, double lambda, const DocumentIndex& index,
                     const Stopwords& stopwords = {});

double score_document(const Query& query, std::size_t doc, const DocumentIndex& index);

struct LengthFilterParams {
  double delta = 0.15;
  double multiplier = 4.0;
};

// Documents with length in [L(1 - m*delta), L(1 + m*delta)], in index order.
std::vector<std::size_t> length_filter_candidates(std::size_t source_len, const DocumentIndex& index,
                                                  const LengthFilterParams& params);

// Mean of |l_t - l_s| / l_s over pairs.
double estimate_delta(const corpus::ParallelCorpus& corpus);
double estimate_delta(const std::vector<std::pair<std::size_t, std::size_t>>& lengths);

struct RetrieveOptions {
  double lambda = 0.18;
  std::size_t n_best = 1;
  std::optional<LengthFilterParams> length_filter;
};

struct Hit {
  std::size_t doc = 0;
  std::string id;
  double score = 0.0;
};

// Best n_best candidates, score descending, ties by document id.
std::vector<Hit> retrieve(const Document& source, const DocumentIndex& index, const RetrieveOptions& options,
                          const Stopwords& stopwords = {});
std::vector<std::vector<Hit>> retrieve_all(const std::vector<Document>& sources, const DocumentIndex& index,
                                           const RetrieveOptions& options, const Stopwords& stopwords = {},
                                           unsigned threads = 1);

using Gold = std::map<std::string, std::set<std::string>>;
using Results = std::map<std::string, std::vector<std::string>>;

struct RetrievalEval {
  std::size_t retrieved = 0;
  std::size_t relevant = 0;
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged over all queries in either map.
RetrievalEval evaluate_retrieval(const Results& results, const Gold& gold);

// A directory of token files (id = file name, sorted) or a `doc_id<TAB>text` TSV.
std::vector<Document> load_collection(const std::filesystem::path& path);
Stopwords load_stopwords(const std::filesystem::path& path);
Gold load_gold(const std::filesystem::path& path);
Results load_results(const std::filesystem::path& path);
// `source_id<TAB>rank<TAB>target_id<TAB>score`, rank from 1.
std::string format_results(const std::vector<Document>& sources, const std::vector<std::vector<Hit>>& hits);

}  // namespace domsel::retrieve
