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

#include "domsel/combine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::combine {

WeightedCorpus combine_corpus_weighted(const std::vector<select::SelectionResult>& selections,
                                       std::span<const double> weights) {
  if (weights.size() != selections.size()) {
    throw ParameterError("got " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(selections.size()) + " selections");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weights must be finite and non-negative");
  }
  WeightedCorpus wc;
  std::map<std::string, int> seen;
  for (const auto& s : selections) seen[s.criterion]++;
  std::map<std::string, int> used;
  for (const auto& s : selections) {
    const int k = ++used[s.criterion];
    wc.labels.push_back(seen[s.criterion] > 1 ? s.criterion + "#" + std::to_string(k) : s.criterion);
  }

  std::map<std::size_t, WeightedEntry> merged;
  for (std::size_t j = 0; j < selections.size(); ++j) {
    std::unordered_set<std::size_t> once;
    for (std::size_t i : selections[j].ranked) {
      if (!once.insert(i).second) throw DataError("selection '" + wc.labels[j] + "' lists index " +
                                                  std::to_string(i) + " twice");
      auto& e = merged[i];
      e.index = i;
      e.weight += weights[j];
      e.provenance.push_back(wc.labels[j]);
    }
  }
  for (auto& [i, e] : merged) {
    if (e.weight > 0.0) wc.entries.push_back(std::move(e));
  }
  return wc;
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

void check_index(std::size_t index, std::size_t size) {
  if (index >= size) {
    throw DataError("selected index " + std::to_string(index) + " outside corpus of " + std::to_string(size));
  }
}

std::size_t copies(double weight) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(weight))); }

}  // namespace

std::string format_weighted(const WeightedCorpus& wc, const corpus::Corpus& source) {
  std::string out;
  for (const auto& e : wc.entries) {
    check_index(e.index, source.size());
    out += format_double(e.weight) + "\t" + join(e.provenance, ',') + "\t" + source.sentences[e.index].text() + "\n";
  }
  return out;
}

std::string format_weighted(const WeightedCorpus& wc, const corpus::ParallelCorpus& source) {
  std::string out;
  for (const auto& e : wc.entries) {
    check_index(e.index, source.size());
    const auto& p = source.pairs[e.index];
    out += format_double(e.weight) + "\t" + join(e.provenance, ',') + "\t" + p.source.text() + "\t" +
           p.target.text() + "\n";
  }
  return out;
}

corpus::Corpus replicate(const WeightedCorpus& wc, const corpus::Corpus& source) {
  corpus::Corpus out{source.id + ".weighted", {}};
  for (const auto& e : wc.entries) {
    check_index(e.index, source.size());
    out.sentences.insert(out.sentences.end(), copies(e.weight), source.sentences[e.index]);
  }
  return out;
}

corpus::ParallelCorpus replicate(const WeightedCorpus& wc, const corpus::ParallelCorpus& source) {
  corpus::ParallelCorpus out{source.id + ".weighted", {}};
  for (const auto& e : wc.entries) {
    check_index(e.index, source.size());
    out.pairs.insert(out.pairs.end(), copies(e.weight), source.pairs[e.index]);
  }
  return out;
}

namespace {

// Visits kept items as (list, item) in round-robin order.
template <typename Visit>
void round_robin(const std::vector<std::vector<std::size_t>>& lists, std::size_t target_size, Visit visit) {
  if (target_size < 1) throw ParameterError("target size must be at least 1");
  std::unordered_set<std::size_t> all;
  std::size_t depth = 0;
  for (const auto& l : lists) {
    all.insert(l.begin(), l.end());
    depth = std::max(depth, l.size());
  }
  if (target_size > all.size()) {
    throw ParameterError("target size " + std::to_string(target_size) + " exceeds the " +
                         std::to_string(all.size()) + " distinct items available");
  }
  std::unordered_set<std::size_t> kept;
  for (std::size_t r = 0; r < depth && kept.size() < target_size; ++r) {
    for (std::size_t j = 0; j < lists.size() && kept.size() < target_size; ++j) {
      if (r < lists[j].size() && kept.insert(lists[j][r]).second) visit(j, lists[j][r]);
    }
  }
}

}  // namespace

std::vector<std::size_t> combine_naive_rank(const std::vector<std::vector<std::size_t>>& lists,
                                            std::size_t target_size) {
  std::vector<std::size_t> out;
  round_robin(lists, target_size, [&](std::size_t, std::size_t item) { out.push_back(item); });
  return out;
}

std::vector<std::vector<std::size_t>> partition_naive_rank(const std::vector<std::vector<std::size_t>>& lists,
                                                           std::size_t target_size) {
  std::vector<std::vector<std::size_t>> parts(lists.size());
  round_robin(lists, target_size, [&](std::size_t j, std::size_t item) { parts[j].push_back(item); });
  return parts;
}

MixtureResult combine_advanced_lm(const std::vector<corpus::Corpus>& sets, const corpus::Corpus& dev, int order,
                                  lm::Smoothing smoothing, const lm::InterpolationOptions& options) {
  if (sets.empty()) throw ParameterError("combine_advanced_lm: no sets");
  std::vector<std::shared_ptr<const lm::LanguageModel>> models;
  for (const auto& s : sets) {
    if (s.empty()) throw DataError("combine_advanced_lm: empty set '" + s.id + "'");
    models.push_back(std::make_shared<lm::NGramModel>(lm::train(s, order, smoothing)));
  }
  MixtureResult result;
  result.model = std::make_shared<lm::MixtureModel>(lm::interpolate(std::move(models), dev, options, &result.trace));
  return result;
}

ProbTable parse_prob_table(std::string_view text) {
  ProbTable table;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    std::vector<std::string_view> fields;
    for (std::size_t pos = 0;;) {
      const auto next = line.find("|||", pos);
      fields.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
      if (next == std::string_view::npos) break;
      pos = next + 3;
    }
    const auto where = "table line " + std::to_string(line_no);
    if (fields.size() < 3) throw DataError(where + ": expected 'source ||| target ||| scores'");
    std::vector<double> scores;
    for (auto s : split_whitespace(fields[2])) {
      const double v = parse_double(s);
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError(where + ": scores must be finite and non-negative");
      scores.push_back(v);
    }
    if (scores.empty()) throw DataError(where + ": no scores");
    if (table.rows.empty()) table.arity = scores.size();
    if (scores.size() != table.arity) {
      throw DataError(where + ": " + std::to_string(scores.size()) + " scores, table arity is " +
                      std::to_string(table.arity));
    }
    auto key = std::make_pair(std::string(fields[0]), std::string(fields[1]));
    if (!table.rows.emplace(std::move(key), std::move(scores)).second) {
      throw DataError(where + ": duplicate entry");
    }
  }
  return table;
}

ProbTable load_prob_table(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : read_lines(path)) text += line + "\n";
  return parse_prob_table(text);
}

std::string format_prob_table(const ProbTable& table) {
  std::string out;
  for (const auto& [key, scores] : table.rows) {
    out += key.first + " ||| " + key.second + " |||";
    for (double s : scores) out += " " + format_double(s);
    out += "\n";
  }
  return out;
}

namespace {

std::vector<double> normalized(std::span<const double> weights, std::size_t expected) {
  if (weights.size() != expected) {
    throw ParameterError("got " + std::to_string(weights.size()) + " weights for " + std::to_string(expected) +
                         " tables");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0) throw ParameterError("weights sum to zero");
  std::vector<double> out;
  for (double w : weights) out.push_back(w / total);
  return out;
}

}  // namespace

ProbTable interpolate_tables(const std::vector<ProbTable>& tables,
                             const std::vector<std::vector<double>>& column_weights) {
  if (tables.empty()) throw ParameterError("interpolate_tables: no tables");
  std::size_t arity = 0;
  for (const auto& t : tables) {
    if (t.rows.empty()) continue;
    if (arity == 0) arity = t.arity;
    if (t.arity != arity) {
      throw DataError("score arity mismatch: " + std::to_string(t.arity) + " vs " + std::to_string(arity));
    }
  }
  if (column_weights.size() != arity && arity != 0) {
    throw ParameterError("got weights for " + std::to_string(column_weights.size()) + " columns, tables have " +
                         std::to_string(arity));
  }
  std::vector<std::vector<double>> w;
  for (const auto& cw : column_weights) w.push_back(normalized(cw, tables.size()));

  ProbTable out;
  out.arity = arity;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (const auto& [key, scores] : tables[i].rows) {
      auto& row = out.rows[key];
      row.resize(arity, 0.0);
      for (std::size_t c = 0; c < arity; ++c) row[c] += w[c][i] * scores[c];
    }
  }
  return out;
}

ProbTable interpolate_tables(const std::vector<ProbTable>& tables, std::span<const double> weights) {
  std::size_t arity = 0;
  for (const auto& t : tables) arity = std::max(arity, t.rows.empty() ? 0 : t.arity);
  const std::vector<double> shared(weights.begin(), weights.end());
  normalized(shared, tables.size());  // validate even when every table is empty
  return interpolate_tables(tables, std::vector<std::vector<double>>(arity, shared));
}

}  // namespace domsel::combine
