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

#include "domsel/webfilter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::webfilter {

std::string_view to_string(Location location) {
  switch (location) {
    case Location::title: return "title";
    case Location::headings: return "headings";
    case Location::metadata: return "metadata";
    case Location::body: return "body";
  }
  return "?";
}

namespace {

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  for (auto t : split_whitespace(text)) out.emplace_back(t);
  return out;
}

}  // namespace

double default_term_weight(std::string_view term) {
  const auto n = split_whitespace(term).size();
  if (n == 0) throw DataError("empty topic term");
  return static_cast<double>(n);
}

TopicDefinition parse_topics(std::string_view text) {
  TopicDefinition topic;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split(line, '\t');
    const auto where = "topic line " + std::to_string(line_no);
    if (fields.size() > 3) throw DataError(where + ": expected term<TAB>weight<TAB>class");
    TopicTerm term;
    term.tokens = tokens_of(fields[0]);
    if (term.tokens.empty()) throw DataError(where + ": empty term");
    term.weight = static_cast<double>(term.tokens.size());
    if (fields.size() > 1 && !trim(fields[1]).empty()) {
      term.weight = parse_double(trim(fields[1]));
      if (!(term.weight >= 0.0) || !std::isfinite(term.weight)) {
        throw DataError(where + ": weight must be finite and non-negative");
      }
    }
    if (fields.size() > 2) term.topic_class = std::string(trim(fields[2]));
    topic.terms.push_back(std::move(term));
  }
  return topic;
}

TopicDefinition load_topics(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : read_lines(path)) text += line + "\n";
  return parse_topics(text);
}

LocatedDocument parse_located_document(std::string id, std::string_view text) {
  LocatedDocument doc{std::move(id), {}};
  auto current = Location::body;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto t = trim(line);
    if (t == "#title") current = Location::title;
    else if (t == "#headings") current = Location::headings;
    else if (t == "#metadata") current = Location::metadata;
    else if (t == "#body") current = Location::body;
    else if (!t.empty()) doc.lines[static_cast<std::size_t>(current)].push_back(tokens_of(t));
  }
  if (std::all_of(doc.lines.begin(), doc.lines.end(), [](const auto& l) { return l.empty(); })) {
    throw DataError("document '" + doc.id + "' has no text");
  }
  return doc;
}

std::vector<LocatedDocument> parse_located_collection(std::string_view text, const std::string& default_id) {
  std::vector<std::pair<std::string, std::string>> chunks;
  for (auto line : split(text, '\n')) {
    const auto t = trim(line);
    if (t.substr(0, 5) == "#doc " || t == "#doc") {
      const auto id = trim(t.substr(4));
      if (id.empty()) throw DataError("'#doc' line without an id");
      chunks.emplace_back(std::string(id), std::string());
      continue;
    }
    if (chunks.empty()) {
      if (t.empty()) continue;
      chunks.emplace_back(default_id, std::string());
    }
    chunks.back().second += line;
    chunks.back().second += '\n';
  }
  std::vector<LocatedDocument> docs;
  for (auto& [id, body] : chunks) docs.push_back(parse_located_document(id, body));
  return docs;
}

std::vector<LocatedDocument> load_located_collection(const std::filesystem::path& path) {
  const auto read = [](const std::filesystem::path& p) {
    std::string text;
    for (const auto& line : read_lines(p)) text += line + "\n";
    return text;
  };
  if (!std::filesystem::is_directory(path)) return parse_located_collection(read(path), path.filename().string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LocatedDocument> docs;
  for (const auto& f : files) docs.push_back(parse_located_document(f.filename().string(), read(f)));
  return docs;
}

std::size_t count_occurrences(const std::vector<std::string>& line, const std::vector<std::string>& term) {
  if (term.empty() || term.size() > line.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + term.size() <= line.size(); ++i) {
    if (std::equal(term.begin(), term.end(), line.begin() + static_cast<long>(i))) ++n;
  }
  return n;
}

double topic_relevance(const LocatedDocument& doc, const TopicDefinition& topic, const LocationWeights& weights) {
  double s = 0.0;
  for (const auto& term : topic.terms) {
    for (std::size_t j = 0; j < kLocationCount; ++j) {
      std::size_t n = 0;
      for (const auto& line : doc.lines[j]) n += count_occurrences(line, term.tokens);
      s += static_cast<double>(n) * term.weight * weights.w[j];
    }
  }
  return s;
}

std::vector<double> topic_relevance(const std::vector<LocatedDocument>& docs, const TopicDefinition& topic,
                                    const LocationWeights& weights, unsigned threads) {
  for (double w : weights.w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("location weights must be finite and non-negative");
  }
  std::vector<double> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = topic_relevance(docs[i], topic, weights);
  });
  return out;
}

std::vector<std::size_t> filter_documents_topk(const std::vector<LocatedDocument>& docs,
                                               const std::vector<double>& scores, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw ParameterError("K must lie in (0, 100], got " + format_double(k_percent));
  }
  if (scores.size() != docs.size()) throw DataError("one relevance score per document is required");
  const auto count =
      static_cast<std::size_t>(std::floor(k_percent * static_cast<double>(docs.size()) / 100.0 + 1e-9));
  if (count == 0) {
    throw ParameterError("K = " + format_double(k_percent) + "% of " + std::to_string(docs.size()) +
                         " documents selects nothing");
  }
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (docs[a].id != docs[b].id) return docs[a].id < docs[b].id;
    return a < b;
  });
  order.resize(count);
  return order;
}

double ppl1(const lm::LanguageModel& model, const corpus::Sentence& sentence) {
  if (sentence.empty()) throw DataError("ppl1 of an empty sentence");
  const auto probs = model.event_probs(sentence.surfaces());
  double log10p = 0.0;
  for (double p : probs) log10p += std::log10(p);
  return std::pow(10.0, -log10p / static_cast<double>(sentence.size()));
}

std::vector<FilteredSentence> rank_sentences_by_ppl1(const std::vector<const LocatedDocument*>& docs,
                                                     const lm::LanguageModel& model, double n_percent,
                                                     unsigned threads) {
  if (!(n_percent > 0.0 && n_percent <= 100.0)) {
    throw ParameterError("N must lie in (0, 100], got " + format_double(n_percent));
  }
  std::vector<FilteredSentence> all;
  for (const auto* d : docs) {
    const auto& body = d->lines[static_cast<std::size_t>(Location::body)];
    for (std::size_t i = 0; i < body.size(); ++i) {
      all.push_back({d->id, i, corpus::sentence_from_words(body[i]), 0.0});
    }
  }
  parallel_for(all.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) all[i].ppl1 = ppl1(model, all[i].sentence);
  });
  std::stable_sort(all.begin(), all.end(),
                   [](const FilteredSentence& a, const FilteredSentence& b) { return a.ppl1 < b.ppl1; });
  const auto keep = static_cast<std::size_t>(std::floor(n_percent * static_cast<double>(all.size()) / 100.0 + 1e-9));
  all.resize(std::min(keep, all.size()));
  return all;
}

std::vector<FilteredSentence> combined_filter(const std::vector<LocatedDocument>& docs, const TopicDefinition& topic,
                                              const LocationWeights& weights, double k_percent, double n_percent,
                                              const lm::LanguageModel& model, unsigned threads) {
  if (!(n_percent > 0.0 && n_percent <= 100.0)) {
    throw ParameterError("N must lie in (0, 100], got " + format_double(n_percent));
  }
  const auto scores = topic_relevance(docs, topic, weights, threads);
  auto top = filter_documents_topk(docs, scores, k_percent);
  // Collection order, so that K = 100 is plain perplexity selection.
  std::sort(top.begin(), top.end());
  std::vector<const LocatedDocument*> kept;
  for (std::size_t i : top) kept.push_back(&docs[i]);
  return rank_sentences_by_ppl1(kept, model, n_percent, threads);
}

}  // namespace domsel::webfilter
