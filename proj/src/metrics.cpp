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

#include "domsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::metrics {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> ngram_counts(const std::vector<std::string>& words, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    counts[Gram(words.begin() + static_cast<long>(i), words.begin() + static_cast<long>(i + n))]++;
  }
  return counts;
}

TokenLines lines_of(const corpus::Corpus& c) {
  TokenLines out;
  for (const auto& s : c.sentences) out.push_back(s.surfaces());
  return out;
}

}  // namespace

BleuReport bleu(const TokenLines& hypotheses, const TokenLines& references, const BleuOptions& options) {
  if (options.max_n < 1) throw ParameterError("BLEU order must be at least 1");
  if (hypotheses.size() != references.size()) {
    throw DataError(std::to_string(hypotheses.size()) + " hypotheses for " + std::to_string(references.size()) +
                    " references");
  }
  if (references.empty()) throw DataError("BLEU of an empty corpus");
  const auto n_max = static_cast<std::size_t>(options.max_n);
  BleuReport r;
  r.matches.assign(n_max, 0);
  r.totals.assign(n_max, 0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (references[i].empty()) throw DataError("reference line " + std::to_string(i + 1) + " is empty");
    r.hypothesis_length += hypotheses[i].size();
    r.reference_length += references[i].size();
    for (std::size_t n = 1; n <= n_max; ++n) {
      const auto ref = ngram_counts(references[i], n);
      for (const auto& [g, c] : ngram_counts(hypotheses[i], n)) {
        auto it = ref.find(g);
        r.matches[n - 1] += it == ref.end() ? 0 : std::min(c, it->second);
        r.totals[n - 1] += c;
      }
    }
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < n_max; ++n) {
    double m = static_cast<double>(r.matches[n]);
    double t = static_cast<double>(r.totals[n]);
    if (options.smooth && n > 0) m += 1.0, t += 1.0;
    const double p = t == 0.0 ? 0.0 : m / t;
    r.precisions.push_back(p);
    if (p == 0.0) zero = true;
    else log_sum += std::log(p);
  }
  const double c = static_cast<double>(r.hypothesis_length);
  const double ref_len = static_cast<double>(r.reference_length);
  r.brevity_penalty = c == 0.0 ? 0.0 : (c > ref_len ? 1.0 : std::exp(1.0 - ref_len / c));
  r.score = zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(n_max));
  return r;
}

BleuReport bleu(const corpus::Corpus& hypotheses, const corpus::Corpus& references, const BleuOptions& options) {
  return bleu(lines_of(hypotheses), lines_of(references), options);
}

TokenLines load_token_lines(const std::filesystem::path& path) {
  TokenLines out;
  for (const auto& line : read_lines(path)) {
    auto& words = out.emplace_back();
    for (auto w : split_whitespace(line)) words.emplace_back(w);
  }
  return out;
}

VocabStats vocab_stats(const corpus::Corpus& corpus) {
  if (corpus.empty()) throw DataError("vocabulary statistics of an empty corpus");
  std::unordered_set<std::string> types;
  VocabStats v;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      ++v.tokens;
      types.insert(t.surface);
    }
  }
  v.types = types.size();
  v.ratio = static_cast<double>(v.types) / static_cast<double>(v.tokens);
  return v;
}

OovStats oov_stats(const corpus::Corpus& train, const corpus::Corpus& test) {
  if (train.empty() || test.empty()) throw DataError("OOV statistics need non-empty corpora");
  std::unordered_set<std::string> known;
  for (const auto& s : train.sentences) {
    for (const auto& t : s.tokens) known.insert(t.surface);
  }
  OovStats o;
  std::unordered_set<std::string> types;
  for (const auto& s : test.sentences) {
    for (const auto& t : s.tokens) {
      ++o.test_tokens;
      const bool oov = !known.count(t.surface);
      o.oov_tokens += oov;
      if (types.insert(t.surface).second) o.oov_types += oov;
    }
  }
  o.test_types = types.size();
  o.token_ratio = static_cast<double>(o.oov_tokens) / static_cast<double>(o.test_tokens);
  o.type_ratio = static_cast<double>(o.oov_types) / static_cast<double>(o.test_types);
  return o;
}

double oov_ratio(const corpus::Corpus& train, const corpus::Corpus& test) { return oov_stats(train, test).token_ratio; }

OverlapStats overlap_stats(const std::vector<std::set<std::size_t>>& subsets) {
  if (subsets.size() < 2) throw ParameterError("overlap statistics need at least 2 subsets");
  std::map<std::size_t, std::size_t> membership;
  for (const auto& s : subsets) {
    for (std::size_t i : s) membership[i]++;
  }
  OverlapStats o;
  o.union_size = membership.size();
  for (const auto& [i, k] : membership) o.intersection += k == subsets.size();
  o.overlap = o.union_size == 0 ? 0.0 : static_cast<double>(o.intersection) / static_cast<double>(o.union_size);
  for (const auto& s : subsets) {
    std::size_t only = 0;
    for (std::size_t i : s) only += membership[i] == 1;
    o.unique.push_back(s.empty() ? 0.0 : static_cast<double>(only) / static_cast<double>(s.size()));
  }
  return o;
}

std::string format_tsv(const Table& table) {
  std::string out = "metric";
  for (const auto& c : table.columns) out += "\t" + c;
  out += "\n";
  for (const auto& [name, cells] : table.rows) {
    out += name;
    for (const auto& c : cells) out += "\t" + c;
    out += "\n";
  }
  return out;
}

std::string format_aligned(const Table& table) {
  std::vector<std::size_t> width(table.columns.size() + 1, std::string("metric").size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) width[c + 1] = table.columns[c].size();
  for (const auto& [name, cells] : table.rows) {
    width[0] = std::max(width[0], name.size());
    for (std::size_t c = 0; c < cells.size() && c + 1 < width.size(); ++c) {
      width[c + 1] = std::max(width[c + 1], cells[c].size());
    }
  }
  const auto row = [&](const std::string& first, const std::vector<std::string>& cells) {
    std::string line = first + std::string(width[0] - first.size(), ' ');
    for (std::size_t c = 0; c < cells.size() && c + 1 < width.size(); ++c) {
      line += "  " + std::string(width[c + 1] - cells[c].size(), ' ') + cells[c];
    }
    return line + "\n";
  };
  std::string out = row("metric", table.columns);
  std::size_t total = width[0];
  for (std::size_t c = 1; c < width.size(); ++c) total += 2 + width[c];
  out += std::string(total, '-') + "\n";
  for (const auto& [name, cells] : table.rows) out += row(name, cells);
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Table diagnostics_table(const std::vector<NamedSubset>& subsets, const corpus::Corpus* test) {
  if (subsets.empty()) throw ParameterError("no subsets to diagnose");
  Table t;
  std::vector<std::string> tokens, types, ratio, oov_tok, oov_type;
  for (const auto& s : subsets) {
    t.columns.push_back(s.name);
    const auto v = vocab_stats(s.corpus);
    tokens.push_back(std::to_string(v.tokens));
    types.push_back(std::to_string(v.types));
    ratio.push_back(fixed(v.ratio, 5));
    if (test) {
      const auto o = oov_stats(s.corpus, *test);
      oov_tok.push_back(fixed(100.0 * o.token_ratio, 2));
      oov_type.push_back(fixed(100.0 * o.type_ratio, 2));
    }
  }
  t.rows.emplace_back("tokens", tokens);
  t.rows.emplace_back("types", types);
  t.rows.emplace_back("type/token", ratio);
  if (test) {
    t.rows.emplace_back("oov % (tokens)", oov_tok);
    t.rows.emplace_back("oov % (types)", oov_type);
  }
  const bool indexed = subsets.size() >= 2 &&
                       std::all_of(subsets.begin(), subsets.end(), [](const auto& s) { return s.indices.has_value(); });
  if (indexed) {
    std::vector<std::set<std::size_t>> sets;
    for (const auto& s : subsets) sets.push_back(*s.indices);
    const auto o = overlap_stats(sets);
    std::vector<std::string> unique, overlap;
    for (double u : o.unique) {
      unique.push_back(fixed(100.0 * u, 2));
      overlap.push_back(fixed(100.0 * o.overlap, 2));
    }
    t.rows.emplace_back("unique %", unique);
    t.rows.emplace_back("overlap % (all)", overlap);
  }
  return t;
}

}  // namespace domsel::metrics
