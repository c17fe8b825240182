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

// Backoff n-gram language models (MLE, Witten-Bell, modified Kneser-Ney),
// ARPA text I/O, cross-entropy/perplexity, and EM-fitted linear mixtures.
//
// Every sentence is scored as the events w_1 .. w_L, </s>, each conditioned
// on at most order-1 preceding symbols, with a single <s> before w_1.
// Probabilities are reported in base 2 unless a name says otherwise.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "domsel/corpus.hpp"

namespace domsel::lm {

using WordId = std::uint32_t;

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

// Lower bound applied to every queried probability. Only reachable for
// unseen events under MLE (and for pathological smoothed tails).
inline constexpr double kProbFloor = 1e-10;

class Vocabulary {
 public:
  static constexpr WordId kUnkId = 0;
  static constexpr WordId kBosId = 1;
  static constexpr WordId kEosId = 2;

  Vocabulary();

  // Types in order of first occurrence. Throws DataError if the corpus uses
  // one of the reserved symbols as a word.
  static Vocabulary from_corpus(const corpus::Corpus& corpus);

  WordId add(std::string_view word);
  // kUnkId for unknown words.
  WordId id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  // Predictable events: every symbol except <s>.
  std::size_t event_count() const { return words_.size() - 1; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
};

enum class Smoothing { mle, witten_bell, modified_kneser_ney };

Smoothing parse_smoothing(std::string_view name);
std::string_view to_string(Smoothing smoothing);

// Anything that assigns a probability to each event of a sentence.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  // One probability per word plus one for the end-of-sentence event.
  virtual std::vector<double> event_probs(std::span<const std::string> words) const = 0;
};

struct NGramEntry {
  double prob = 0.0;
  double log10_prob = 0.0;
  double backoff = 1.0;
  double log10_backoff = 0.0;
  bool has_backoff = false;
};

struct NGramKeyHash {
  std::size_t operator()(const std::vector<WordId>& key) const noexcept;
};

using NGramTable = std::unordered_map<std::vector<WordId>, NGramEntry, NGramKeyHash>;

struct TrainOptions {
  int order = 4;
  Smoothing smoothing = Smoothing::modified_kneser_ney;
  // When set, words outside it are counted as <unk>.
  std::optional<Vocabulary> vocabulary;
};

// Modified Kneser-Ney discounts of one order, or the Witten-Bell fallback.
struct OrderSmoothing {
  Smoothing method = Smoothing::mle;
  std::array<double, 3> discounts{0.0, 0.0, 0.0};  // D1, D2, D3+
};

class NGramModel : public LanguageModel {
 public:
  NGramModel(int order, Vocabulary vocabulary, Smoothing smoothing);

  int order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<OrderSmoothing>& order_smoothing() const { return order_smoothing_; }

  // p(word | context); context holds the most recent symbols last and is
  // truncated to order-1 symbols.
  double prob(std::span<const WordId> context, WordId word) const;

  std::vector<WordId> map_words(std::span<const std::string> words) const;
  std::vector<double> event_probs_ids(std::span<const WordId> ids) const;
  std::vector<double> event_probs(std::span<const std::string> words) const override;

  // Stored n-grams of one order (1-based).
  const NGramTable& table(int order) const { return tables_.at(static_cast<std::size_t>(order - 1)); }
  NGramTable& mutable_table(int order) { return tables_.at(static_cast<std::size_t>(order - 1)); }
  // Stored contexts of n-grams of `order`, i.e. the (order-1)-grams that carry
  // a backoff weight. For order 1 this is the single empty context.
  std::vector<std::vector<WordId>> contexts(int order) const;

  void set_order_smoothing(std::vector<OrderSmoothing> s) { order_smoothing_ = std::move(s); }

 private:
  int order_;
  Vocabulary vocab_;
  Smoothing smoothing_;
  std::vector<NGramTable> tables_;
  std::vector<OrderSmoothing> order_smoothing_;
};

NGramModel train(const corpus::Corpus& corpus, const TrainOptions& options);
NGramModel train(const corpus::Corpus& corpus, int order, Smoothing smoothing);

// ARPA text: an optional `# smoothing=<name>` comment, the \data\ header
// with per-order counts, then `log10prob<TAB>ngram[<TAB>backoff]` lines.
// Entries are sorted by n-gram bytes; values use shortest round-trip decimals.
std::string write_arpa(const NGramModel& model);
NGramModel read_arpa(std::string_view text);
NGramModel load_arpa(const std::filesystem::path& path);
void save_arpa(const NGramModel& model, const std::filesystem::path& path);

double log_prob(const LanguageModel& model, const corpus::Sentence& sentence);

struct CorpusScore {
  double log2_prob = 0.0;
  std::size_t events = 0;  // words + one end-of-sentence event per sentence
  std::size_t words = 0;

  double cross_entropy() const { return -log2_prob / static_cast<double>(events); }
  double perplexity() const;
};

CorpusScore evaluate(const LanguageModel& model, const corpus::Corpus& corpus, unsigned threads = 1);
double cross_entropy(const LanguageModel& model, const corpus::Corpus& corpus, unsigned threads = 1);
double perplexity(const LanguageModel& model, const corpus::Corpus& corpus, unsigned threads = 1);

class MixtureModel : public LanguageModel {
 public:
  MixtureModel(std::vector<std::shared_ptr<const LanguageModel>> components,
               std::vector<double> weights);

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return components_.size(); }
  const LanguageModel& component(std::size_t i) const { return *components_.at(i); }

  std::vector<double> event_probs(std::span<const std::string> words) const override;

 private:
  std::vector<std::shared_ptr<const LanguageModel>> components_;
  std::vector<double> weights_;
};

struct InterpolationOptions {
  double tolerance = 1e-6;  // relative change of the dev log-likelihood
  int max_iterations = 100;
};

struct InterpolationTrace {
  // Dev log-likelihood (natural log) of the uniform start and after each update.
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;
};

// Fits mixture weights maximizing the dev-set likelihood by EM, starting from
// uniform weights.
MixtureModel interpolate(std::vector<std::shared_ptr<const LanguageModel>> models,
                         const corpus::Corpus& dev, const InterpolationOptions& options = {},
                         InterpolationTrace* trace = nullptr);

// Weights fitted directly on per-event component probabilities
// (probs[k][e] = p_k(event e)).
std::vector<double> fit_mixture_weights(const std::vector<std::vector<double>>& probs,
                                        const InterpolationOptions& options = {},
                                        InterpolationTrace* trace = nullptr);

}  // namespace domsel::lm
