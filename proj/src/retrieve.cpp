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

#include "domsel/retrieve.hpp"

#include <algorithm>
#include <cmath>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::retrieve {

Document make_document(std::string id, std::string_view text) {
  Document d{std::move(id), {}};
  for (auto line : split(text, '\n')) {
    for (auto t : split_whitespace(line)) {
      if (t.back() == '\r') t.remove_suffix(1);
      if (!t.empty()) d.tokens.emplace_back(t);
    }
  }
  if (d.tokens.empty()) throw DataError("document '" + d.id + "' is empty");
  return d;
}

DocumentIndex::DocumentIndex(std::vector<Document> docs) : docs_(std::move(docs)) {
  tf_.resize(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].tokens.empty()) throw DataError("document '" + docs_[i].id + "' is empty");
    if (!ids_.emplace(docs_[i].id, i).second) throw DataError("duplicate document id '" + docs_[i].id + "'");
    for (const auto& t : docs_[i].tokens) {
      if (tf_[i][t]++ == 0) df_[t]++;
    }
  }
}

std::size_t DocumentIndex::df(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

std::size_t DocumentIndex::tf(std::size_t doc, const std::string& term) const {
  const auto& m = tf_.at(doc);
  auto it = m.find(term);
  return it == m.end() ? 0 : it->second;
}

std::optional<std::size_t> DocumentIndex::find(const std::string& id) const {
  auto it = ids_.find(id);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Query generate_query(const Document& doc, double lambda, const DocumentIndex& index, const Stopwords& stopwords) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("query size fraction must lie in (0, 1]");
  if (doc.tokens.empty()) throw DataError("document '" + doc.id + "' is empty");
  std::map<std::string, double> counts;
  for (const auto& t : doc.tokens) {
    if (!stopwords.count(t)) counts[t] += 1.0;
  }
  Query q;
  const double raw = lambda * static_cast<double>(doc.length());
  q.size = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
  const double docs = static_cast<double>(index.size());
  for (const auto& [term, f] : counts) {
    const std::size_t df = index.df(term);
    const double idf = df == 0 ? 1.0 : std::log(docs / static_cast<double>(df));
    q.terms.push_back({term, f * idf});
  }
  std::stable_sort(q.terms.begin(), q.terms.end(),
                   [](const QueryTerm& a, const QueryTerm& b) { return a.weight > b.weight; });
  if (q.terms.size() > q.size) q.terms.resize(q.size);
  return q;
}

double score_document(const Query& query, std::size_t doc, const DocumentIndex& index) {
  if (query.terms.empty()) return 0.0;
  const double docs = static_cast<double>(index.size());
  const double norm = 1.0 / std::sqrt(static_cast<double>(index.doc(doc).length()));
  double sum = 0.0;
  std::size_t matched = 0;
  for (const auto& t : query.terms) {
    const std::size_t f = index.tf(doc, t.term);
    if (f == 0) continue;
    ++matched;
    const double idf = 1.0 + std::log(docs / (static_cast<double>(index.df(t.term)) + 1.0));
    sum += std::sqrt(static_cast<double>(f)) * idf * norm;
  }
  return static_cast<double>(matched) / static_cast<double>(query.terms.size()) * sum;
}

std::vector<std::size_t> length_filter_candidates(std::size_t source_len, const DocumentIndex& index,
                                                  const LengthFilterParams& params) {
  if (source_len < 1) throw DataError("source document is empty");
  if (!(params.delta >= 0.0) || !(params.multiplier >= 0.0)) {
    throw ParameterError("length filter delta and multiplier must be non-negative");
  }
  const double l = static_cast<double>(source_len);
  const double lo = l * (1.0 - params.multiplier * params.delta) - 1e-9;
  const double hi = l * (1.0 + params.multiplier * params.delta) + 1e-9;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double len = static_cast<double>(index.doc(i).length());
    if (len >= lo && len <= hi) out.push_back(i);
  }
  return out;
}

double estimate_delta(const std::vector<std::pair<std::size_t, std::size_t>>& lengths) {
  if (lengths.empty()) throw DataError("estimate_delta: empty corpus");
  double total = 0.0;
  for (const auto& [ls, lt] : lengths) {
    if (ls == 0) throw DataError("estimate_delta: source length 0");
    total += std::abs(static_cast<double>(lt) - static_cast<double>(ls)) / static_cast<double>(ls);
  }
  return total / static_cast<double>(lengths.size());
}

double estimate_delta(const corpus::ParallelCorpus& corpus) {
  std::vector<std::pair<std::size_t, std::size_t>> lengths;
  for (const auto& p : corpus.pairs) lengths.emplace_back(p.source.size(), p.target.size());
  return estimate_delta(lengths);
}

std::vector<Hit> retrieve(const Document& source, const DocumentIndex& index, const RetrieveOptions& options,
                          const Stopwords& stopwords) {
  if (options.n_best < 1) throw ParameterError("n-best must be at least 1");
  std::vector<std::size_t> candidates;
  if (options.length_filter) {
    candidates = length_filter_candidates(source.length(), index, *options.length_filter);
  } else {
    candidates.resize(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) candidates[i] = i;
  }
  const auto query = generate_query(source, options.lambda, index, stopwords);
  std::vector<Hit> hits;
  hits.reserve(candidates.size());
  for (std::size_t d : candidates) hits.push_back({d, index.doc(d).id, score_document(query, d, index)});
  const auto better = [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  const std::size_t keep = std::min(options.n_best, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(keep), hits.end(), better);
  hits.resize(keep);
  return hits;
}

std::vector<std::vector<Hit>> retrieve_all(const std::vector<Document>& sources, const DocumentIndex& index,
                                           const RetrieveOptions& options, const Stopwords& stopwords,
                                           unsigned threads) {
  std::vector<std::vector<Hit>> out(sources.size());
  parallel_for(sources.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = retrieve(sources[i], index, options, stopwords);
  });
  return out;
}

RetrievalEval evaluate_retrieval(const Results& results, const Gold& gold) {
  RetrievalEval e;
  for (const auto& [q, ids] : results) {
    e.retrieved += ids.size();
    auto g = gold.find(q);
    if (g == gold.end()) continue;
    for (const auto& id : std::set<std::string>(ids.begin(), ids.end())) e.correct += g->second.count(id);
  }
  for (const auto& [q, ids] : gold) e.relevant += ids.size();
  e.precision = e.retrieved == 0 ? 0.0 : static_cast<double>(e.correct) / static_cast<double>(e.retrieved);
  e.recall = e.relevant == 0 ? 0.0 : static_cast<double>(e.correct) / static_cast<double>(e.relevant);
  e.f1 = e.precision + e.recall == 0.0 ? 0.0 : 2 * e.precision * e.recall / (e.precision + e.recall);
  return e;
}

namespace {

std::vector<std::vector<std::string_view>> tsv_rows(const std::vector<std::string>& lines, std::size_t min_fields,
                                                    const std::string& what) {
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || lines[i].front() == '#') continue;
    auto fields = split(lines[i], '\t');
    if (fields.size() < min_fields) {
      throw DataError(what + " line " + std::to_string(i + 1) + ": expected " + std::to_string(min_fields) +
                      " tab-separated fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<Document> load_collection(const std::filesystem::path& path) {
  std::vector<Document> docs;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string text;
      for (const auto& line : read_lines(f)) text += line + "\n";
      docs.push_back(make_document(f.filename().string(), text));
    }
    return docs;
  }
  const auto lines = read_lines(path);
  for (const auto& row : tsv_rows(lines, 2, path.string())) {
    docs.push_back(make_document(std::string(trim(row[0])), row[1]));
  }
  return docs;
}

Stopwords load_stopwords(const std::filesystem::path& path) {
  Stopwords out;
  for (const auto& line : read_lines(path)) {
    const auto t = trim(line);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

Gold load_gold(const std::filesystem::path& path) {
  Gold gold;
  const auto lines = read_lines(path);
  for (const auto& row : tsv_rows(lines, 2, path.string())) {
    gold[std::string(trim(row[0]))].emplace(trim(row[1]));
  }
  return gold;
}

Results load_results(const std::filesystem::path& path) {
  Results results;
  const auto lines = read_lines(path);
  for (const auto& row : tsv_rows(lines, 3, path.string())) {
    results[std::string(trim(row[0]))].emplace_back(trim(row[2]));
  }
  return results;
}

std::string format_results(const std::vector<Document>& sources, const std::vector<std::vector<Hit>>& hits) {
  std::string out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t r = 0; r < hits.at(i).size(); ++r) {
      const auto& h = hits[i][r];
      out += sources[i].id + "\t" + std::to_string(r + 1) + "\t" + h.id + "\t" + format_double(h.score) + "\n";
    }
  }
  return out;
}

}  // namespace domsel::retrieve
