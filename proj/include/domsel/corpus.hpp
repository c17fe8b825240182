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

// Corpus data model: factored tokens, monolingual and parallel corpora, the
// deterministic preprocessing transforms, and factor-view projection.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace domsel::corpus {

inline constexpr char kFactorSeparator = '|';
inline constexpr std::string_view kNumberPlaceholder = "@num@";

struct Token {
  std::string surface;
  std::optional<std::string> lemma;
  std::optional<std::string> pos;
  std::optional<std::string> ne;

  bool operator==(const Token&) const = default;
};

// Builds a surface-only token. Throws DataError if `surface` is empty or
// contains whitespace or the factor separator.
Token make_token(std::string_view surface);

// Parses `surface|lemma|pos|ne`; trailing factors may be missing and empty
// fields read as absent.
Token parse_factored_token(std::string_view text);
std::string format_factored_token(const Token& token);

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::vector<std::string> surfaces() const;
  // Space-joined surface forms.
  std::string text() const;
  // Space-joined factored tokens; equals text() for surface-only sentences.
  std::string factored_text() const;

  bool operator==(const Sentence&) const = default;
};

Sentence sentence_from_text(std::string_view line);
Sentence sentence_from_factored(std::string_view line);
Sentence sentence_from_words(const std::vector<std::string>& words);

struct SentencePair {
  Sentence source;
  Sentence target;

  bool operator==(const SentencePair&) const = default;
};

struct Corpus {
  std::string id;
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
};

struct ParallelCorpus {
  std::string id;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  Corpus source_side() const;
  Corpus target_side() const;
};

Corpus corpus_from_lines(const std::vector<std::string>& lines, std::string id = {});
ParallelCorpus parallel_from_sides(const Corpus& source, const Corpus& target,
                                   std::string id = {});

enum class Format { plain, factored, tsv_parallel, two_file_parallel };

Format parse_format(std::string_view name);

// Monolingual formats (plain, factored) yield Corpus; tsv_parallel yields
// ParallelCorpus. two_file_parallel needs the second path and goes through
// load_parallel.
std::variant<Corpus, ParallelCorpus> load_corpus(const std::filesystem::path& path, Format format);
Corpus load_monolingual(const std::filesystem::path& path, bool factored = false);
ParallelCorpus load_parallel_tsv(const std::filesystem::path& path, bool factored = false);
ParallelCorpus load_parallel(const std::filesystem::path& source,
                             const std::filesystem::path& target, bool factored = false);

std::string format_corpus(const Corpus& corpus, bool factored = false);
std::string format_parallel_tsv(const ParallelCorpus& corpus, bool factored = false);

Corpus dedup(const Corpus& corpus);
ParallelCorpus dedup(const ParallelCorpus& corpus);

// Drops pairs where either side has more than max_len tokens.
ParallelCorpus length_filter(const ParallelCorpus& corpus, std::size_t max_len = 80);
Corpus length_filter(const Corpus& corpus, std::size_t max_len = 80);

std::string normalize_numbers(std::string_view text);
Sentence normalize_numbers(const Sentence& sentence);

// U+2019 -> U+0027.
std::string normalize_apostrophes(std::string_view text);
Sentence normalize_apostrophes(const Sentence& sentence);

class Lexicon {
 public:
  explicit Lexicon(bool case_sensitive = true) : case_sensitive_(case_sensitive) {}

  // Lines are `source<TAB>target phrase`, or `source target phrase` when no
  // tab is present. The first translation listed for a word wins.
  static Lexicon load(const std::filesystem::path& path, bool case_sensitive = true);

  // Returns false (and keeps the existing entry) when `source` is already present.
  bool add(std::string_view source, std::string_view target);
  std::optional<std::string_view> lookup(std::string_view source) const;
  std::size_t size() const { return entries_.size(); }
  bool case_sensitive() const { return case_sensitive_; }

 private:
  std::string key(std::string_view word) const;

  bool case_sensitive_;
  std::unordered_map<std::string, std::string> entries_;
};

// Pieces of `token` between split hyphens. A hyphen splits only when both
// neighbours are non-hyphen characters; tokens without split points yield a
// single piece.
std::vector<std::string_view> split_hyphenated(std::string_view token);

// Wraps hyphenated tokens whose parts are all in the lexicon as
// `<alt trans="T1 ... Tk">token</alt>`; other tokens are emitted verbatim.
std::string hyphen_alt_markup(const Sentence& sentence, const Lexicon& lexicon);

enum class FactorView { f, fn, l, ln, t, tn };

FactorView parse_factor_view(std::string_view name);
std::string_view to_string(FactorView view);

// Projects every token onto the view's stream. Throws DataError naming the
// first token lacking a required factor; NE views also need at least one NE
// annotation somewhere in the corpus.
Corpus factor_view(const Corpus& corpus, FactorView view);
ParallelCorpus factor_view(const ParallelCorpus& corpus, FactorView view);

}  // namespace domsel::corpus
