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

#include "domsel/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::select {

using corpus::Corpus;
using corpus::ParallelCorpus;

Criterion parse_criterion(std::string_view name) {
  if (name == "cosine") return Criterion::cosine;
  if (name == "ce") return Criterion::cross_entropy;
  if (name == "ml") return Criterion::moore_lewis;
  if (name == "mml") return Criterion::bilingual_moore_lewis;
  if (name == "fms") return Criterion::fms;
  throw ParameterError("unknown criterion '" + std::string(name) + "' (expected cosine|ce|ml|mml|fms)");
}

std::string_view to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::cosine: return "cosine";
    case Criterion::cross_entropy: return "ce";
    case Criterion::moore_lewis: return "ml";
    case Criterion::bilingual_moore_lewis: return "mml";
    case Criterion::fms: return "fms";
  }
  return "?";
}

Direction direction_of(Criterion criterion) {
  switch (criterion) {
    case Criterion::cosine:
    case Criterion::fms:
      return Direction::higher_is_better;
    default:
      return Direction::lower_is_better;
  }
}

Direction parse_direction(std::string_view name) {
  if (name == "higher-is-better") return Direction::higher_is_better;
  if (name == "lower-is-better") return Direction::lower_is_better;
  throw DataError("unknown direction '" + std::string(name) + "'");
}

std::string_view to_string(Direction direction) {
  return direction == Direction::higher_is_better ? "higher-is-better" : "lower-is-better";
}

ReferenceMode parse_reference_mode(std::string_view name) {
  if (name == "online") return ReferenceMode::online;
  if (name == "offline") return ReferenceMode::offline;
  throw ParameterError("unknown reference mode '" + std::string(name) + "' (expected online|offline)");
}

std::string_view to_string(ReferenceMode mode) {
  return mode == ReferenceMode::online ? "online" : "offline";
}

std::vector<double> score_cosine(const Corpus& general, const Corpus& in_domain, unsigned threads) {
  if (general.empty() || in_domain.empty()) throw DataError("score_cosine: empty corpus");

  // Term ids over the general corpus, plus document frequencies.
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> tf(general.size());
  for (std::size_t i = 0; i < general.size(); ++i) {
    std::unordered_map<std::uint32_t, double> counts;
    for (const auto& t : general.sentences[i].tokens) {
      auto [it, inserted] = ids.try_emplace(t.surface, static_cast<std::uint32_t>(ids.size()));
      counts[it->second] += 1.0;
    }
    tf[i].assign(counts.begin(), counts.end());
    std::sort(tf[i].begin(), tf[i].end());
  }
  std::vector<double> df(ids.size(), 0.0);
  for (const auto& row : tf) {
    for (const auto& [term, c] : row) df[term] += 1.0;
  }
  const double docs = static_cast<double>(general.size());
  std::vector<double> idf(ids.size());
  for (std::size_t t = 0; t < idf.size(); ++t) idf[t] = std::log(docs / df[t]);

  // Terms absent from the general corpus have no idf and are left out of the
  // query; they would only rescale its norm.
  std::vector<double> query(ids.size(), 0.0);
  for (const auto& s : in_domain.sentences) {
    for (const auto& t : s.tokens) {
      if (auto it = ids.find(t.surface); it != ids.end()) query[it->second] += 1.0;
    }
  }
  double query_norm = 0.0;
  for (std::size_t t = 0; t < query.size(); ++t) {
    query[t] *= idf[t];
    query_norm += query[t] * query[t];
  }
  query_norm = std::sqrt(query_norm);

  std::vector<double> scores(general.size(), 0.0);
  parallel_for(general.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double dot = 0.0, norm = 0.0;
      for (const auto& [term, c] : tf[i]) {
        const double w = c * idf[term];
        dot += w * query[term];
        norm += w * w;
      }
      if (dot > 0.0 && norm > 0.0 && query_norm > 0.0) {
        scores[i] = std::clamp(dot / (std::sqrt(norm) * query_norm), 0.0, 1.0);
      }
    }
  });
  return scores;
}

namespace {

double per_event_ce(const lm::LanguageModel& model, const corpus::Sentence& sentence) {
  return -lm::log_prob(model, sentence) / static_cast<double>(sentence.size() + 1);
}

}  // namespace

std::vector<double> score_cross_entropy(const Corpus& general, const lm::LanguageModel& in_lm,
                                        unsigned threads) {
  std::vector<double> scores(general.size());
  parallel_for(general.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) scores[i] = per_event_ce(in_lm, general.sentences[i]);
  });
  return scores;
}

std::vector<double> score_moore_lewis(const Corpus& general, const lm::LanguageModel& in_lm,
                                      const lm::LanguageModel& out_lm, unsigned threads) {
  std::vector<double> scores(general.size());
  parallel_for(general.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = general.sentences[i];
      scores[i] = per_event_ce(in_lm, s) - per_event_ce(out_lm, s);
    }
  });
  return scores;
}

std::vector<double> score_bilingual_ml(const ParallelCorpus& general,
                                       const lm::LanguageModel& in_src_lm,
                                       const lm::LanguageModel& out_src_lm,
                                       const lm::LanguageModel& in_tgt_lm,
                                       const lm::LanguageModel& out_tgt_lm, unsigned threads) {
  std::vector<double> scores(general.size());
  parallel_for(general.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = general.pairs[i];
      const double src = per_event_ce(in_src_lm, p.source) - per_event_ce(out_src_lm, p.source);
      const double tgt = per_event_ce(in_tgt_lm, p.target) - per_event_ce(out_tgt_lm, p.target);
      scores[i] = src + tgt;
    }
  });
  return scores;
}

namespace {

template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b, std::vector<std::size_t>& row) {
  if (a.size() < b.size()) std::swap(a, b);
  row.resize(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({sub, up + 1, row[j - 1] + 1});
      diagonal = up;
    }
  }
  return row[b.size()];
}

template <typename T>
double fms_of(std::span<const T> a, std::span<const T> b, std::vector<std::size_t>& row) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const double d = static_cast<double>(edit_distance(a, b, row));
  return std::clamp(1.0 - d / static_cast<double>(longest), 0.0, 1.0);
}

}  // namespace

std::size_t word_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row;
  return edit_distance(a, b, row);
}

double fuzzy_match_score(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row;
  return fms_of(a, b, row);
}

std::vector<double> score_fms(const Corpus& general, const Corpus& reference, const FmsOptions& options) {
  if (reference.empty()) throw DataError("score_fms: empty reference corpus");
  std::unordered_map<std::string, std::uint32_t> ids;
  const auto encode = [&ids](const Corpus& c) {
    std::vector<std::vector<std::uint32_t>> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (const auto& t : c.sentences[i].tokens) {
        out[i].push_back(ids.try_emplace(t.surface, static_cast<std::uint32_t>(ids.size())).first->second);
      }
    }
    return out;
  };
  const auto gen = encode(general);
  const auto ref = encode(reference);
  const double n_ref = static_cast<double>(ref.size());

  std::vector<double> scores(general.size(), 0.0);
  parallel_for(general.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> row;
    for (std::size_t i = begin; i < end; ++i) {
      const std::span<const std::uint32_t> g(gen[i]);
      double total = 0.0;
      for (const auto& r : ref) {
        if (options.fast) {
          const double longest = static_cast<double>(std::max(g.size(), r.size()));
          const double gap = std::abs(static_cast<double>(g.size()) - static_cast<double>(r.size()));
          if (1.0 - gap / longest < options.cutoff) continue;
        }
        total += fms_of(g, std::span<const std::uint32_t>(r), row);
      }
      scores[i] = total / n_ref;
    }
  });
  return scores;
}

std::vector<std::size_t> rank(std::span<const double> scores, Direction direction) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw DataError("rank: non-finite score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (direction == Direction::higher_is_better) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  }
  return order;
}

SelectionResult select_top(const CriterionScores& scores, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw ParameterError("K must lie in (0, 100], got " + format_double(k_percent));
  }
  const double n = static_cast<double>(scores.scores.size());
  // Tolerate representation error such as 14.3% of 1000 = 142.99999...
  const auto count = static_cast<std::size_t>(std::floor(k_percent * n / 100.0 + 1e-9));
  if (count == 0) {
    throw ParameterError("K = " + format_double(k_percent) + "% of " +
                         std::to_string(scores.scores.size()) + " sentences selects nothing");
  }
  SelectionResult result{rank(scores.scores, scores.direction), scores.criterion, scores.direction,
                         scores.provenance};
  result.ranked.resize(count);
  result.provenance["k_percent"] = format_double(k_percent);
  return result;
}

SelectionResult threshold_filter(const CriterionScores& scores, double theta) {
  SelectionResult result{{}, scores.criterion, scores.direction, scores.provenance};
  for (std::size_t i : rank(scores.scores, scores.direction)) {
    const double s = scores.scores[i];
    const bool better = scores.direction == Direction::higher_is_better ? s > theta : s < theta;
    if (better) result.ranked.push_back(i);
  }
  result.provenance["theta"] = format_double(theta);
  return result;
}

Corpus sample_subset(const Corpus& corpus, std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  Corpus out{corpus.id + ".sample", {}};
  for (std::size_t i : sample_indices(corpus.size(), std::min(size, corpus.size()), rng)) {
    out.sentences.push_back(corpus.sentences[i]);
  }
  return out;
}

namespace {

Provenance base_provenance(const SelectionSetup& setup) {
  Provenance p;
  p["criterion"] = std::string(to_string(setup.criterion));
  p["direction"] = std::string(to_string(direction_of(setup.criterion)));
  p["reference_mode"] = std::string(to_string(setup.reference_mode));
  switch (setup.criterion) {
    case Criterion::cross_entropy:
    case Criterion::moore_lewis:
    case Criterion::bilingual_moore_lewis:
      p["lm_order"] = std::to_string(setup.order);
      p["lm_smoothing"] = std::string(lm::to_string(setup.smoothing));
      p["ce_normalization"] = "per-event (words + end-of-sentence)";
      if (setup.criterion != Criterion::cross_entropy) p["seed"] = std::to_string(setup.seed);
      break;
    case Criterion::fms:
      p["fms_mode"] = setup.fms.fast ? "fast" : "exact";
      if (setup.fms.fast) p["fms_cutoff"] = format_double(setup.fms.cutoff);
      break;
    case Criterion::cosine:
      break;
  }
  return p;
}

struct LmPair {
  lm::NGramModel in;
  lm::NGramModel out;
};

LmPair train_pair(const Corpus& general, const Corpus& reference, const SelectionSetup& setup,
                  std::uint64_t seed) {
  lm::TrainOptions options;
  options.order = setup.order;
  options.smoothing = setup.smoothing;
  options.vocabulary = lm::Vocabulary::from_corpus(reference);
  auto in = lm::train(reference, options);
  auto out = lm::train(sample_subset(general, reference.size(), seed), options);
  return {std::move(in), std::move(out)};
}

}  // namespace

CriterionScores score_corpus(const Corpus& general, const Corpus& reference, const SelectionSetup& setup) {
  if (general.empty() || reference.empty()) throw DataError("score_corpus: empty corpus");
  CriterionScores result;
  result.criterion = std::string(to_string(setup.criterion));
  result.direction = direction_of(setup.criterion);
  result.provenance = base_provenance(setup);
  switch (setup.criterion) {
    case Criterion::cosine:
      result.scores = score_cosine(general, reference, setup.threads);
      break;
    case Criterion::cross_entropy: {
      lm::TrainOptions options;
      options.order = setup.order;
      options.smoothing = setup.smoothing;
      const auto in = lm::train(reference, options);
      result.scores = score_cross_entropy(general, in, setup.threads);
      break;
    }
    case Criterion::moore_lewis: {
      const auto lms = train_pair(general, reference, setup, setup.seed);
      result.scores = score_moore_lewis(general, lms.in, lms.out, setup.threads);
      break;
    }
    case Criterion::fms: {
      FmsOptions fms = setup.fms;
      fms.threads = setup.threads;
      result.scores = score_fms(general, reference, fms);
      break;
    }
    case Criterion::bilingual_moore_lewis:
      throw ParameterError("criterion mml needs parallel corpora");
  }
  return result;
}

CriterionScores score_parallel(const ParallelCorpus& general, const ParallelCorpus& reference,
                               const SelectionSetup& setup) {
  if (setup.criterion != Criterion::bilingual_moore_lewis) {
    return score_corpus(general.source_side(), reference.source_side(), setup);
  }
  if (general.empty() || reference.empty()) throw DataError("score_parallel: empty corpus");
  CriterionScores result;
  result.criterion = "mml";
  result.direction = Direction::lower_is_better;
  result.provenance = base_provenance(setup);
  // One subset, drawn once, serves both sides so out-domain pairs stay aligned.
  const auto src = train_pair(general.source_side(), reference.source_side(), setup, setup.seed);
  const auto tgt = train_pair(general.target_side(), reference.target_side(), setup, setup.seed);
  result.scores = score_bilingual_ml(general, src.in, src.out, tgt.in, tgt.out, setup.threads);
  return result;
}

CriterionScores factored_scores(const Corpus& general, const Corpus& reference, corpus::FactorView view,
                                const SelectionSetup& setup) {
  auto result = score_corpus(corpus::factor_view(general, view), corpus::factor_view(reference, view), setup);
  result.provenance["factor_view"] = std::string(corpus::to_string(view));
  return result;
}

CriterionScores factored_scores(const ParallelCorpus& general, const ParallelCorpus& reference,
                                corpus::FactorView view, const SelectionSetup& setup) {
  auto result =
      score_parallel(corpus::factor_view(general, view), corpus::factor_view(reference, view), setup);
  result.provenance["factor_view"] = std::string(corpus::to_string(view));
  return result;
}

SelectionResult factored_select(const Corpus& general, const Corpus& reference, corpus::FactorView view,
                                const SelectionSetup& setup, double k_percent) {
  // Projection keeps sentence order, so projected indices are original indices.
  return select_top(factored_scores(general, reference, view, setup), k_percent);
}

namespace {

std::string format_header(const std::string& criterion, Direction direction, const Provenance& provenance) {
  Provenance all = provenance;
  all["criterion"] = criterion;
  all["direction"] = std::string(to_string(direction));
  std::string out;
  for (const auto& [k, v] : all) out += "# " + k + "=" + v + "\n";
  return out;
}

// Fills criterion/direction/provenance from `# key=value` lines; returns the
// data lines.
std::vector<std::string_view> parse_header(std::string_view text, std::string& criterion,
                                           Direction& direction, Provenance& provenance) {
  std::vector<std::string_view> data;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      std::string key(trim(body.substr(0, eq)));
      std::string value(trim(body.substr(eq + 1)));
      if (key == "criterion") criterion = value;
      else if (key == "direction") direction = parse_direction(value);
      else provenance[key] = value;
      continue;
    }
    data.push_back(line);
  }
  return data;
}

std::string read_all(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : read_lines(path)) {
    text += line;
    text += '\n';
  }
  return text;
}

}  // namespace

std::string format_scores(const CriterionScores& scores) {
  std::string out = format_header(scores.criterion, scores.direction, scores.provenance);
  for (std::size_t i = 0; i < scores.scores.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += format_double(scores.scores[i]);
    out += '\n';
  }
  return out;
}

CriterionScores parse_scores(std::string_view text) {
  CriterionScores result;
  const auto data = parse_header(text, result.criterion, result.direction, result.provenance);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto fields = split(data[i], '\t');
    if (fields.size() != 2) throw DataError("score file line " + std::to_string(i + 1) + ": expected index<TAB>score");
    if (static_cast<std::size_t>(parse_double(fields[0])) != i) {
      throw DataError("score file line " + std::to_string(i + 1) + ": indices must be 0..n-1 in order");
    }
    result.scores.push_back(parse_double(fields[1]));
  }
  return result;
}

CriterionScores load_scores(const std::filesystem::path& path) { return parse_scores(read_all(path)); }

std::string format_selection(const SelectionResult& selection) {
  std::string out = format_header(selection.criterion, selection.direction, selection.provenance);
  for (std::size_t i : selection.ranked) out += std::to_string(i) + "\n";
  return out;
}

SelectionResult parse_selection(std::string_view text) {
  SelectionResult result;
  const auto data = parse_header(text, result.criterion, result.direction, result.provenance);
  for (auto line : data) {
    const double v = parse_double(line);
    if (v < 0 || v != std::floor(v)) throw DataError("selection file: bad index '" + std::string(line) + "'");
    result.ranked.push_back(static_cast<std::size_t>(v));
  }
  return result;
}

SelectionResult load_selection(const std::filesystem::path& path) { return parse_selection(read_all(path)); }

}  // namespace domsel::select
