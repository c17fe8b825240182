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

#include "domsel/lm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::lm {

namespace {

constexpr double kLog10Zero = -99.0;

double to_log10(double p) { return p > 0.0 ? std::log10(p) : kLog10Zero; }

bool is_reserved(std::string_view word) { return word == kUnk || word == kBos || word == kEos; }

using Key = std::vector<WordId>;
using CountMap = std::unordered_map<Key, double, NGramKeyHash>;

struct ContextStats {
  double total = 0.0;
  std::array<std::size_t, 3> by_count{0, 0, 0};  // count 1, count 2, count >= 3
  std::size_t types = 0;
};

}  // namespace

std::size_t NGramKeyHash::operator()(const std::vector<WordId>& key) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (WordId id : key) {
    h ^= id + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

Vocabulary::Vocabulary() {
  for (std::string_view w : {kUnk, kBos, kEos}) {
    ids_.emplace(std::string(w), static_cast<WordId>(words_.size()));
    words_.emplace_back(w);
  }
}

Vocabulary Vocabulary::from_corpus(const corpus::Corpus& corpus) {
  Vocabulary v;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) v.add(t.surface);
  }
  return v;
}

WordId Vocabulary::add(std::string_view word) {
  if (is_reserved(word)) {
    throw DataError("word '" + std::string(word) + "' collides with a reserved LM symbol");
  }
  auto [it, inserted] = ids_.try_emplace(std::string(word), static_cast<WordId>(words_.size()));
  if (inserted) words_.emplace_back(word);
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const { return ids_.count(std::string(word)) > 0; }

Smoothing parse_smoothing(std::string_view name) {
  if (name == "mle") return Smoothing::mle;
  if (name == "wb" || name == "witten-bell") return Smoothing::witten_bell;
  if (name == "mkn" || name == "kn" || name == "modified-kneser-ney") {
    return Smoothing::modified_kneser_ney;
  }
  throw ParameterError("unknown smoothing '" + std::string(name) + "' (expected mle|wb|mkn)");
}

std::string_view to_string(Smoothing smoothing) {
  switch (smoothing) {
    case Smoothing::mle: return "mle";
    case Smoothing::witten_bell: return "witten-bell";
    case Smoothing::modified_kneser_ney: return "modified-kneser-ney";
  }
  return "?";
}

NGramModel::NGramModel(int order, Vocabulary vocabulary, Smoothing smoothing)
    : order_(order), vocab_(std::move(vocabulary)), smoothing_(smoothing),
      tables_(static_cast<std::size_t>(std::max(order, 1))) {
  if (order < 1) throw ParameterError("n-gram order must be >= 1");
}

double NGramModel::prob(std::span<const WordId> context, WordId word) const {
  const std::size_t max_ctx = static_cast<std::size_t>(order_ - 1);
  if (context.size() > max_ctx) context = context.subspan(context.size() - max_ctx);

  double scale = 1.0;
  double p = 0.0;
  Key key;
  key.reserve(context.size() + 1);
  for (std::size_t len = context.size();; --len) {
    const auto history = context.subspan(context.size() - len);
    key.assign(history.begin(), history.end());
    key.push_back(word);
    const auto& table = tables_[len];
    if (auto it = table.find(key); it != table.end()) {
      p = scale * it->second.prob;
      break;
    }
    if (len == 0) {
      auto unk = table.find(Key{Vocabulary::kUnkId});
      p = unk == table.end() ? 0.0 : scale * unk->second.prob;
      break;
    }
    key.pop_back();
    const auto& ctx_table = tables_[len - 1];
    if (auto it = ctx_table.find(key); it != ctx_table.end() && it->second.has_backoff) {
      scale *= it->second.backoff;
    }
  }
  return std::max(p, kProbFloor);
}

std::vector<WordId> NGramModel::map_words(std::span<const std::string> words) const {
  std::vector<WordId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab_.id(w));
  return ids;
}

std::vector<double> NGramModel::event_probs_ids(std::span<const WordId> ids) const {
  std::vector<WordId> history;
  history.reserve(ids.size() + 1);
  history.push_back(Vocabulary::kBosId);
  history.insert(history.end(), ids.begin(), ids.end());
  const std::size_t max_ctx = static_cast<std::size_t>(order_ - 1);

  std::vector<double> probs;
  probs.reserve(ids.size() + 1);
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    // Symbols before event i are history[0 .. i].
    const std::size_t end = i + 1;
    const std::size_t begin = end > max_ctx ? end - max_ctx : 0;
    const WordId word = i < ids.size() ? ids[i] : Vocabulary::kEosId;
    probs.push_back(prob(std::span<const WordId>(history).subspan(begin, end - begin), word));
  }
  return probs;
}

std::vector<double> NGramModel::event_probs(std::span<const std::string> words) const {
  const auto ids = map_words(words);
  return event_probs_ids(ids);
}

std::vector<std::vector<WordId>> NGramModel::contexts(int order) const {
  if (order < 1 || order > order_) throw ParameterError("contexts: order out of range");
  if (order == 1) return {{}};
  std::vector<std::vector<WordId>> out;
  for (const auto& [key, entry] : tables_[static_cast<std::size_t>(order - 2)]) {
    if (entry.has_backoff) out.push_back(key);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Witten-Bell or Kneser-Ney mass kept by one observed count, and the share
// left for the lower order.
double kept_mass(const OrderSmoothing& s, double count) {
  switch (s.method) {
    case Smoothing::mle:
    case Smoothing::witten_bell:
      return count;
    case Smoothing::modified_kneser_ney: {
      const double d = count >= 3.0 ? s.discounts[2] : s.discounts[static_cast<std::size_t>(count) - 1];
      return std::max(count - d, 0.0);
    }
  }
  return count;
}

double lower_share(const OrderSmoothing& s, const ContextStats& stats) {
  switch (s.method) {
    case Smoothing::mle:
      return 0.0;
    case Smoothing::witten_bell:
      return static_cast<double>(stats.types) / (stats.total + static_cast<double>(stats.types));
    case Smoothing::modified_kneser_ney:
      return (s.discounts[0] * static_cast<double>(stats.by_count[0]) +
              s.discounts[1] * static_cast<double>(stats.by_count[1]) +
              s.discounts[2] * static_cast<double>(stats.by_count[2])) /
             stats.total;
  }
  return 0.0;
}

double denominator(const OrderSmoothing& s, const ContextStats& stats) {
  return s.method == Smoothing::witten_bell ? stats.total + static_cast<double>(stats.types)
                                            : stats.total;
}

OrderSmoothing estimate_order_smoothing(Smoothing requested, const CountMap& counts, int order) {
  OrderSmoothing s;
  s.method = requested;
  if (requested != Smoothing::modified_kneser_ney) return s;

  std::array<double, 4> coc{0, 0, 0, 0};
  for (const auto& [key, c] : counts) {
    const auto k = static_cast<std::size_t>(c);
    if (k >= 1 && k <= 4) coc[k - 1] += 1.0;
  }
  const double n1 = coc[0], n2 = coc[1], n3 = coc[2], n4 = coc[3];
  bool ok = n1 > 0 && n2 > 0;
  if (ok) {
    const double y = n1 / (n1 + 2.0 * n2);
    s.discounts = {1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2,
                   n3 > 0 ? 3.0 - 4.0 * y * n4 / n3 : 3.0};
    for (std::size_t i = 0; i < 3; ++i) {
      ok = ok && s.discounts[i] >= 0.0 && s.discounts[i] <= static_cast<double>(i + 1);
    }
    ok = ok && s.discounts[0] > 0.0;
  }
  if (!ok) {
    log_warning("order " + std::to_string(order) +
                ": counts-of-counts too sparse for modified Kneser-Ney (n1=" +
                format_double(n1) + ", n2=" + format_double(n2) +
                "); falling back to Witten-Bell");
    s.method = Smoothing::witten_bell;
    s.discounts = {0.0, 0.0, 0.0};
  }
  return s;
}

}  // namespace

NGramModel train(const corpus::Corpus& corpus, const TrainOptions& options) {
  if (options.order < 1) throw ParameterError("train: order must be >= 1");
  if (corpus.empty()) throw DataError("train: empty corpus");

  Vocabulary vocab = options.vocabulary ? *options.vocabulary : Vocabulary::from_corpus(corpus);
  const auto n = static_cast<std::size_t>(options.order);

  // Raw counts of every k-gram ending at a predicted position.
  std::vector<CountMap> raw(n);
  Key seq;
  for (const auto& sentence : corpus.sentences) {
    seq.clear();
    seq.push_back(Vocabulary::kBosId);
    for (const auto& t : sentence.tokens) seq.push_back(vocab.id(t.surface));
    seq.push_back(Vocabulary::kEosId);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      for (std::size_t k = 1; k <= n && k <= i + 1; ++k) {
        raw[k - 1][Key(seq.begin() + static_cast<std::ptrdiff_t>(i + 1 - k),
                       seq.begin() + static_cast<std::ptrdiff_t>(i + 1))] += 1.0;
      }
    }
  }

  // Kneser-Ney replaces lower-order counts by the number of distinct left
  // extensions, except for n-grams anchored at <s>.
  std::vector<CountMap> counts = raw;
  if (options.smoothing == Smoothing::modified_kneser_ney) {
    for (std::size_t k = 1; k < n; ++k) {
      CountMap& lower = counts[k - 1];
      for (auto& [key, c] : lower) {
        if (key.front() != Vocabulary::kBosId) c = 0.0;
      }
      for (const auto& [key, c] : raw[k]) {
        lower[Key(key.begin() + 1, key.end())] += 1.0;
      }
      std::erase_if(lower, [](const auto& kv) { return kv.second <= 0.0; });
    }
  }

  NGramModel model(options.order, vocab, options.smoothing);
  std::vector<OrderSmoothing> per_order;
  const double uniform = 1.0 / static_cast<double>(vocab.event_count());

  for (std::size_t k = 1; k <= n; ++k) {
    const CountMap& order_counts = counts[k - 1];
    const OrderSmoothing s = estimate_order_smoothing(options.smoothing, order_counts, static_cast<int>(k));
    per_order.push_back(s);

    std::unordered_map<Key, ContextStats, NGramKeyHash> stats;
    for (const auto& [key, c] : order_counts) {
      auto& st = stats[Key(key.begin(), key.end() - 1)];
      st.total += c;
      st.types += 1;
      st.by_count[std::min<std::size_t>(static_cast<std::size_t>(c), 3) - 1] += 1;
    }

    NGramTable& table = model.mutable_table(static_cast<int>(k));
    if (k == 1) {
      const ContextStats& st = stats.at(Key{});
      const double share = lower_share(s, st);
      const double denom = denominator(s, st);
      for (WordId w = 0; w < vocab.size(); ++w) {
        NGramEntry e;
        if (w != Vocabulary::kBosId) {
          auto it = order_counts.find(Key{w});
          const double c = it == order_counts.end() ? 0.0 : it->second;
          e.prob = (c > 0.0 ? kept_mass(s, c) / denom : 0.0) + share * uniform;
        }
        e.log10_prob = to_log10(e.prob);
        table.emplace(Key{w}, e);
      }
    } else {
      for (const auto& [key, c] : order_counts) {
        const Key context(key.begin(), key.end() - 1);
        const ContextStats& st = stats.at(context);
        const double lower =
            s.method == Smoothing::mle
                ? 0.0
                : model.prob(std::span<const WordId>(context).subspan(1), key.back());
        NGramEntry e;
        e.prob = kept_mass(s, c) / denominator(s, st) + lower_share(s, st) * lower;
        e.log10_prob = to_log10(e.prob);
        table.emplace(key, e);
      }
      // Interpolated models back off with exactly the lower-order share.
      NGramTable& ctx_table = model.mutable_table(static_cast<int>(k - 1));
      for (const auto& [context, st] : stats) {
        NGramEntry& e = ctx_table.at(context);
        e.backoff = lower_share(s, st);
        e.log10_backoff = to_log10(e.backoff);
        e.has_backoff = true;
      }
    }
  }
  model.set_order_smoothing(std::move(per_order));
  return model;
}

NGramModel train(const corpus::Corpus& corpus, int order, Smoothing smoothing) {
  TrainOptions options;
  options.order = order;
  options.smoothing = smoothing;
  return train(corpus, options);
}

std::string write_arpa(const NGramModel& model) {
  const auto& vocab = model.vocabulary();
  std::string out = "# smoothing=" + std::string(to_string(model.smoothing())) + "\n\\data\\\n";
  for (int k = 1; k <= model.order(); ++k) {
    out += "ngram " + std::to_string(k) + "=" + std::to_string(model.table(k).size()) + "\n";
  }
  for (int k = 1; k <= model.order(); ++k) {
    out += "\n\\" + std::to_string(k) + "-grams:\n";
    std::vector<std::pair<std::vector<std::string_view>, const NGramEntry*>> rows;
    rows.reserve(model.table(k).size());
    for (const auto& [key, entry] : model.table(k)) {
      std::vector<std::string_view> words;
      for (WordId id : key) words.emplace_back(vocab.word(id));
      rows.emplace_back(std::move(words), &entry);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [words, entry] : rows) {
      out += format_double(entry->log10_prob);
      out += '\t';
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
      }
      if (entry->has_backoff) {
        out += '\t';
        out += format_double(entry->log10_backoff);
      }
      out += '\n';
    }
  }
  out += "\n\\end\\\n";
  return out;
}

NGramModel read_arpa(std::string_view text) {
  const auto lines = split(text, '\n');
  Smoothing smoothing = Smoothing::modified_kneser_ney;
  std::vector<std::size_t> declared;
  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.rfind("# smoothing=", 0) == 0) smoothing = parse_smoothing(line.substr(12));
    if (line == "\\data\\") break;
  }
  if (i == lines.size()) throw DataError("ARPA: missing \\data\\ section");
  for (++i; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) {
      if (!declared.empty()) break;
      continue;
    }
    if (line.rfind("ngram ", 0) != 0) break;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("ARPA: malformed count line");
    const auto order = static_cast<std::size_t>(parse_double(line.substr(6, eq - 6)));
    if (order != declared.size() + 1) throw DataError("ARPA: n-gram orders out of sequence");
    declared.push_back(static_cast<std::size_t>(parse_double(line.substr(eq + 1))));
  }
  if (declared.empty()) throw DataError("ARPA: no n-gram counts declared");

  struct Row {
    std::vector<std::string> words;
    NGramEntry entry;
  };
  std::vector<std::vector<Row>> sections(declared.size());
  int current = 0;
  bool ended = false;
  for (; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      const auto dash = line.find("-grams:");
      if (dash == std::string_view::npos) throw DataError("ARPA: unexpected section '" + std::string(line) + "'");
      current = static_cast<int>(parse_double(line.substr(1, dash - 1)));
      if (current < 1 || current > static_cast<int>(declared.size())) {
        throw DataError("ARPA: section order out of range");
      }
      continue;
    }
    if (current == 0) throw DataError("ARPA: n-gram line outside a section");
    const auto fields = split_whitespace(line);
    const auto k = static_cast<std::size_t>(current);
    if (fields.size() != k + 1 && fields.size() != k + 2) {
      throw DataError("ARPA: wrong field count in '" + std::string(line) + "'");
    }
    Row row;
    row.entry.log10_prob = parse_double(fields[0]);
    row.entry.prob = row.entry.log10_prob <= kLog10Zero ? 0.0 : std::pow(10.0, row.entry.log10_prob);
    for (std::size_t w = 0; w < k; ++w) row.words.emplace_back(fields[1 + w]);
    if (fields.size() == k + 2) {
      row.entry.has_backoff = true;
      row.entry.log10_backoff = parse_double(fields[k + 1]);
      row.entry.backoff =
          row.entry.log10_backoff <= kLog10Zero ? 0.0 : std::pow(10.0, row.entry.log10_backoff);
    }
    sections[k - 1].push_back(std::move(row));
  }
  if (!ended) throw DataError("ARPA: missing \\end\\ marker");
  for (std::size_t k = 0; k < declared.size(); ++k) {
    if (sections[k].size() != declared[k]) {
      throw DataError("ARPA: order " + std::to_string(k + 1) + " declares " +
                      std::to_string(declared[k]) + " n-grams but lists " +
                      std::to_string(sections[k].size()));
    }
  }

  Vocabulary vocab;
  for (const auto& row : sections[0]) {
    if (!is_reserved(row.words[0])) vocab.add(row.words[0]);
  }
  NGramModel model(static_cast<int>(declared.size()), vocab, smoothing);
  for (std::size_t k = 0; k < sections.size(); ++k) {
    NGramTable& table = model.mutable_table(static_cast<int>(k + 1));
    for (const auto& row : sections[k]) {
      Key key;
      for (const auto& w : row.words) {
        if (!model.vocabulary().contains(w)) {
          throw DataError("ARPA: word '" + w + "' missing from the unigram section");
        }
        key.push_back(model.vocabulary().id(w));
      }
      if (!table.emplace(std::move(key), row.entry).second) {
        throw DataError("ARPA: duplicate n-gram");
      }
    }
  }
  return model;
}

NGramModel load_arpa(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : read_lines(path)) {
    text += line;
    text += '\n';
  }
  return read_arpa(text);
}

void save_arpa(const NGramModel& model, const std::filesystem::path& path) {
  write_text_file(path, write_arpa(model));
}

double log_prob(const LanguageModel& model, const corpus::Sentence& sentence) {
  const auto words = sentence.surfaces();
  double total = 0.0;
  for (double p : model.event_probs(words)) total += std::log2(p);
  return total;
}

double CorpusScore::perplexity() const { return std::exp2(cross_entropy()); }

CorpusScore evaluate(const LanguageModel& model, const corpus::Corpus& corpus, unsigned threads) {
  if (corpus.empty()) throw DataError("evaluate: empty corpus");
  std::vector<double> per_sentence(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) per_sentence[i] = log_prob(model, corpus.sentences[i]);
  });
  CorpusScore score;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    score.log2_prob += per_sentence[i];
    score.words += corpus.sentences[i].size();
  }
  score.events = score.words + corpus.size();
  return score;
}

double cross_entropy(const LanguageModel& model, const corpus::Corpus& corpus, unsigned threads) {
  return evaluate(model, corpus, threads).cross_entropy();
}

double perplexity(const LanguageModel& model, const corpus::Corpus& corpus, unsigned threads) {
  return evaluate(model, corpus, threads).perplexity();
}

MixtureModel::MixtureModel(std::vector<std::shared_ptr<const LanguageModel>> components,
                           std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw ParameterError("mixture needs at least one component");
  if (components_.size() != weights_.size()) {
    throw ParameterError("mixture: component and weight counts differ");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ParameterError("mixture weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("mixture weights must sum to 1");
  for (const auto& c : components_) {
    if (!c) throw ParameterError("mixture: null component");
  }
}

std::vector<double> MixtureModel::event_probs(std::span<const std::string> words) const {
  std::vector<double> mixed(words.size() + 1, 0.0);
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto probs = components_[k]->event_probs(words);
    for (std::size_t e = 0; e < mixed.size(); ++e) mixed[e] += weights_[k] * probs[e];
  }
  return mixed;
}

namespace {

double mixture_log_likelihood(const std::vector<std::vector<double>>& probs,
                              const std::vector<double>& weights) {
  const std::size_t events = probs.front().size();
  double ll = 0.0;
  for (std::size_t e = 0; e < events; ++e) {
    double p = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) p += weights[k] * probs[k][e];
    ll += std::log(p);
  }
  return ll;
}

}  // namespace

std::vector<double> fit_mixture_weights(const std::vector<std::vector<double>>& probs,
                                        const InterpolationOptions& options,
                                        InterpolationTrace* trace) {
  if (probs.empty()) throw ParameterError("interpolate: no components");
  const std::size_t k_count = probs.size();
  const std::size_t events = probs.front().size();
  if (events == 0) throw DataError("interpolate: empty dev set");
  for (const auto& row : probs) {
    if (row.size() != events) throw ParameterError("interpolate: ragged probability matrix");
  }

  std::vector<double> weights(k_count, 1.0 / static_cast<double>(k_count));
  InterpolationTrace local;
  double ll = mixture_log_likelihood(probs, weights);
  local.log_likelihood.push_back(ll);

  std::vector<double> next(k_count);
  for (int it = 0; it < options.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t e = 0; e < events; ++e) {
      double mix = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) mix += weights[k] * probs[k][e];
      for (std::size_t k = 0; k < k_count; ++k) next[k] += weights[k] * probs[k][e] / mix;
    }
    double sum = 0.0;
    for (double& w : next) {
      w /= static_cast<double>(events);
      sum += w;
    }
    for (double& w : next) w /= sum;
    weights = next;

    const double updated = mixture_log_likelihood(probs, weights);
    local.log_likelihood.push_back(updated);
    local.iterations = it + 1;
    const double change = std::abs(updated - ll) / std::max(std::abs(ll), 1e-300);
    ll = updated;
    if (change < options.tolerance) {
      local.converged = true;
      break;
    }
  }
  // EM approaches a boundary optimum only sublinearly; finish on the best
  // vertex when it beats the fitted interior point.
  for (std::size_t k = 0; k < k_count; ++k) {
    std::vector<double> vertex(k_count, 0.0);
    vertex[k] = 1.0;
    const double vertex_ll = mixture_log_likelihood(probs, vertex);
    if (vertex_ll > ll) {
      ll = vertex_ll;
      weights = vertex;
    }
  }
  if (ll > local.log_likelihood.back()) local.log_likelihood.push_back(ll);
  if (trace) *trace = std::move(local);
  return weights;
}

MixtureModel interpolate(std::vector<std::shared_ptr<const LanguageModel>> models,
                         const corpus::Corpus& dev, const InterpolationOptions& options,
                         InterpolationTrace* trace) {
  if (models.empty()) throw ParameterError("interpolate: no components");
  if (dev.empty()) throw DataError("interpolate: empty dev corpus");
  std::vector<std::vector<double>> probs(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    for (const auto& sentence : dev.sentences) {
      const auto p = models[k]->event_probs(sentence.surfaces());
      probs[k].insert(probs[k].end(), p.begin(), p.end());
    }
  }
  auto weights = fit_mixture_weights(probs, options, trace);
  return MixtureModel(std::move(models), std::move(weights));
}

}  // namespace domsel::lm
