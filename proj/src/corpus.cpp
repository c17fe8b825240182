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

#include "domsel/corpus.hpp"

#include <unordered_set>

#include "domsel/error.hpp"
#include "domsel/util.hpp"

namespace domsel::corpus {

namespace {

bool has_forbidden_char(std::string_view text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == kFactorSeparator) return true;
  }
  return false;
}

std::optional<std::string> optional_field(std::string_view field) {
  if (field.empty()) return std::nullopt;
  return std::string(field);
}

template <typename Fn>
Sentence map_tokens(const Sentence& sentence, Fn&& fn) {
  Sentence out;
  out.tokens.reserve(sentence.size());
  for (const auto& token : sentence.tokens) out.tokens.push_back(fn(token));
  return out;
}

std::string location(std::size_t sentence, std::size_t token, const Token& t) {
  return "sentence " + std::to_string(sentence) + ", token " + std::to_string(token) + " ('" +
         t.surface + "')";
}

}  // namespace

Token make_token(std::string_view surface) {
  if (surface.empty()) throw DataError("empty token");
  if (has_forbidden_char(surface)) {
    throw DataError("token '" + std::string(surface) + "' contains whitespace or '|'");
  }
  return Token{std::string(surface), std::nullopt, std::nullopt, std::nullopt};
}

Token parse_factored_token(std::string_view text) {
  const auto fields = split(text, kFactorSeparator);
  if (fields.size() > 4) {
    throw DataError("token '" + std::string(text) + "' has " + std::to_string(fields.size()) +
                    " factors, at most 4 allowed");
  }
  Token token = make_token(fields[0]);
  if (fields.size() > 1) token.lemma = optional_field(fields[1]);
  if (fields.size() > 2) token.pos = optional_field(fields[2]);
  if (fields.size() > 3) token.ne = optional_field(fields[3]);
  return token;
}

std::string format_factored_token(const Token& token) {
  std::string out = token.surface;
  const std::optional<std::string>* factors[] = {&token.lemma, &token.pos, &token.ne};
  std::size_t last = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (factors[i]->has_value()) last = i + 1;
  }
  for (std::size_t i = 0; i < last; ++i) {
    out += kFactorSeparator;
    if (factors[i]->has_value()) out += **factors[i];
  }
  return out;
}

std::vector<std::string> Sentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::string Sentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].surface;
  }
  return out;
}

std::string Sentence::factored_text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += format_factored_token(tokens[i]);
  }
  return out;
}

Sentence sentence_from_text(std::string_view line) {
  Sentence s;
  for (auto word : split_whitespace(line)) s.tokens.push_back(make_token(word));
  if (s.empty()) throw DataError("empty sentence");
  return s;
}

Sentence sentence_from_factored(std::string_view line) {
  Sentence s;
  for (auto word : split_whitespace(line)) s.tokens.push_back(parse_factored_token(word));
  if (s.empty()) throw DataError("empty sentence");
  return s;
}

Sentence sentence_from_words(const std::vector<std::string>& words) {
  Sentence s;
  s.tokens.reserve(words.size());
  for (const auto& w : words) s.tokens.push_back(make_token(w));
  if (s.empty()) throw DataError("empty sentence");
  return s;
}

Corpus ParallelCorpus::source_side() const {
  Corpus c{id + ".src", {}};
  c.sentences.reserve(pairs.size());
  for (const auto& p : pairs) c.sentences.push_back(p.source);
  return c;
}

Corpus ParallelCorpus::target_side() const {
  Corpus c{id + ".tgt", {}};
  c.sentences.reserve(pairs.size());
  for (const auto& p : pairs) c.sentences.push_back(p.target);
  return c;
}

Corpus corpus_from_lines(const std::vector<std::string>& lines, std::string id) {
  Corpus c{std::move(id), {}};
  c.sentences.reserve(lines.size());
  for (const auto& line : lines) c.sentences.push_back(sentence_from_text(line));
  return c;
}

ParallelCorpus parallel_from_sides(const Corpus& source, const Corpus& target, std::string id) {
  if (source.size() != target.size()) {
    throw DataError("parallel sides differ in length: " + std::to_string(source.size()) + " vs " +
                    std::to_string(target.size()));
  }
  ParallelCorpus pc{std::move(id), {}};
  pc.pairs.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    pc.pairs.push_back({source.sentences[i], target.sentences[i]});
  }
  return pc;
}

Format parse_format(std::string_view name) {
  if (name == "plain") return Format::plain;
  if (name == "factored") return Format::factored;
  if (name == "tsv-parallel" || name == "tsv") return Format::tsv_parallel;
  if (name == "two-file-parallel" || name == "two-file") return Format::two_file_parallel;
  throw ParameterError("unknown corpus format '" + std::string(name) + "'");
}

namespace {

Sentence parse_line(std::string_view line, bool factored, const std::filesystem::path& path,
                    std::size_t lineno) {
  try {
    return factored ? sentence_from_factored(line) : sentence_from_text(line);
  } catch (const DataError& e) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

Corpus load_monolingual(const std::filesystem::path& path, bool factored) {
  const auto lines = read_lines(path);
  Corpus c{path.filename().string(), {}};
  c.sentences.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    c.sentences.push_back(parse_line(lines[i], factored, path, i + 1));
  }
  return c;
}

ParallelCorpus load_parallel_tsv(const std::filesystem::path& path, bool factored) {
  const auto lines = read_lines(path);
  ParallelCorpus pc{path.filename().string(), {}};
  pc.pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) +
                      ": expected source<TAB>target");
    }
    pc.pairs.push_back({parse_line(fields[0], factored, path, i + 1),
                        parse_line(fields[1], factored, path, i + 1)});
  }
  return pc;
}

ParallelCorpus load_parallel(const std::filesystem::path& source,
                             const std::filesystem::path& target, bool factored) {
  const auto src = read_lines(source);
  const auto tgt = read_lines(target);
  if (src.size() != tgt.size()) {
    throw DataError("line-count mismatch: " + source.string() + " has " +
                    std::to_string(src.size()) + " lines, " + target.string() + " has " +
                    std::to_string(tgt.size()));
  }
  ParallelCorpus pc{source.filename().string(), {}};
  pc.pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    pc.pairs.push_back(
        {parse_line(src[i], factored, source, i + 1), parse_line(tgt[i], factored, target, i + 1)});
  }
  return pc;
}

std::variant<Corpus, ParallelCorpus> load_corpus(const std::filesystem::path& path,
                                                 Format format) {
  switch (format) {
    case Format::plain:
      return load_monolingual(path, false);
    case Format::factored:
      return load_monolingual(path, true);
    case Format::tsv_parallel:
      return load_parallel_tsv(path, false);
    case Format::two_file_parallel:
      break;
  }
  throw ParameterError("two-file-parallel input needs both paths; use load_parallel");
}

std::string format_corpus(const Corpus& corpus, bool factored) {
  std::string out;
  for (const auto& s : corpus.sentences) {
    out += factored ? s.factored_text() : s.text();
    out += '\n';
  }
  return out;
}

std::string format_parallel_tsv(const ParallelCorpus& corpus, bool factored) {
  std::string out;
  for (const auto& p : corpus.pairs) {
    out += factored ? p.source.factored_text() : p.source.text();
    out += '\t';
    out += factored ? p.target.factored_text() : p.target.text();
    out += '\n';
  }
  return out;
}

Corpus dedup(const Corpus& corpus) {
  Corpus out{corpus.id, {}};
  std::unordered_set<std::string> seen;
  for (const auto& s : corpus.sentences) {
    if (seen.insert(s.factored_text()).second) out.sentences.push_back(s);
  }
  return out;
}

ParallelCorpus dedup(const ParallelCorpus& corpus) {
  ParallelCorpus out{corpus.id, {}};
  std::unordered_set<std::string> seen;
  for (const auto& p : corpus.pairs) {
    if (seen.insert(p.source.factored_text() + '\t' + p.target.factored_text()).second) {
      out.pairs.push_back(p);
    }
  }
  return out;
}

ParallelCorpus length_filter(const ParallelCorpus& corpus, std::size_t max_len) {
  if (max_len < 1) throw ParameterError("length_filter: max_len must be >= 1");
  ParallelCorpus out{corpus.id, {}};
  for (const auto& p : corpus.pairs) {
    if (p.source.size() <= max_len && p.target.size() <= max_len) out.pairs.push_back(p);
  }
  return out;
}

Corpus length_filter(const Corpus& corpus, std::size_t max_len) {
  if (max_len < 1) throw ParameterError("length_filter: max_len must be >= 1");
  Corpus out{corpus.id, {}};
  for (const auto& s : corpus.sentences) {
    if (s.size() <= max_len) out.sentences.push_back(s);
  }
  return out;
}

std::string normalize_numbers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] >= '0' && text[i] <= '9') {
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
      out += kNumberPlaceholder;
    } else {
      out += text[i++];
    }
  }
  return out;
}

Sentence normalize_numbers(const Sentence& sentence) {
  return map_tokens(sentence, [](const Token& t) {
    Token out = t;
    out.surface = normalize_numbers(t.surface);
    return out;
  });
}

std::string normalize_apostrophes(std::string_view text) {
  static constexpr std::string_view kRightQuote = "\xE2\x80\x99";
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kRightQuote.size()) == kRightQuote) {
      out += '\'';
      i += kRightQuote.size();
    } else {
      out += text[i++];
    }
  }
  return out;
}

Sentence normalize_apostrophes(const Sentence& sentence) {
  return map_tokens(sentence, [](const Token& t) {
    Token out = t;
    out.surface = normalize_apostrophes(t.surface);
    if (out.lemma) out.lemma = normalize_apostrophes(*out.lemma);
    return out;
  });
}

std::string Lexicon::key(std::string_view word) const {
  std::string k(word);
  if (!case_sensitive_) {
    for (char& c : k) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return k;
}

bool Lexicon::add(std::string_view source, std::string_view target) {
  return entries_.try_emplace(key(source), std::string(target)).second;
}

std::optional<std::string_view> Lexicon::lookup(std::string_view source) const {
  auto it = entries_.find(key(source));
  if (it == entries_.end()) return std::nullopt;
  return std::string_view(it->second);
}

Lexicon Lexicon::load(const std::filesystem::path& path, bool case_sensitive) {
  Lexicon lex(case_sensitive);
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    std::string_view source;
    std::string_view target;
    if (const auto tab = line.find('\t'); tab != std::string_view::npos) {
      source = trim(line.substr(0, tab));
      target = trim(line.substr(tab + 1));
    } else {
      const auto space = line.find(' ');
      if (space == std::string_view::npos) {
        throw DataError(path.string() + ":" + std::to_string(i + 1) + ": missing translation");
      }
      source = line.substr(0, space);
      target = trim(line.substr(space + 1));
    }
    if (source.empty() || target.empty() || has_forbidden_char(source)) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": malformed lexicon entry");
    }
    lex.add(source, target);
  }
  return lex;
}

std::vector<std::string_view> split_hyphenated(std::string_view token) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 1; i + 1 < token.size(); ++i) {
    if (token[i] == '-' && token[i - 1] != '-' && token[i + 1] != '-') {
      parts.push_back(token.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(token.substr(start));
  return parts;
}

std::string hyphen_alt_markup(const Sentence& sentence, const Lexicon& lexicon) {
  std::string out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i) out += ' ';
    const std::string& word = sentence.tokens[i].surface;
    const auto parts = split_hyphenated(word);
    if (parts.size() < 2) {
      out += word;
      continue;
    }
    std::string translation;
    bool complete = true;
    for (auto part : parts) {
      const auto hit = lexicon.lookup(part);
      if (!hit) {
        complete = false;
        break;
      }
      if (!translation.empty()) translation += ' ';
      translation += *hit;
    }
    if (complete) {
      out += "<alt trans=\"" + translation + "\">" + word + "</alt>";
    } else {
      out += word;
    }
  }
  return out;
}

FactorView parse_factor_view(std::string_view name) {
  if (name == "f") return FactorView::f;
  if (name == "fn") return FactorView::fn;
  if (name == "l") return FactorView::l;
  if (name == "ln") return FactorView::ln;
  if (name == "t") return FactorView::t;
  if (name == "tn") return FactorView::tn;
  throw ParameterError("unknown factor view '" + std::string(name) + "' (expected f|fn|l|ln|t|tn)");
}

std::string_view to_string(FactorView view) {
  switch (view) {
    case FactorView::f: return "f";
    case FactorView::fn: return "fn";
    case FactorView::l: return "l";
    case FactorView::ln: return "ln";
    case FactorView::t: return "t";
    case FactorView::tn: return "tn";
  }
  return "?";
}

Corpus factor_view(const Corpus& corpus, FactorView view) {
  const bool with_ne = view == FactorView::fn || view == FactorView::ln || view == FactorView::tn;
  const bool lemma = view == FactorView::l || view == FactorView::ln;
  const bool pos = view == FactorView::t || view == FactorView::tn;

  if (with_ne) {
    bool any_ne = false;
    for (const auto& s : corpus.sentences) {
      for (const auto& t : s.tokens) any_ne = any_ne || t.ne.has_value();
    }
    if (!any_ne && !corpus.empty()) {
      throw DataError("view " + std::string(to_string(view)) + " needs NE factors, but " +
                      location(0, 0, corpus.sentences.front().tokens.front()) +
                      " and every other token lack one");
    }
  }

  Corpus out{corpus.id + "." + std::string(to_string(view)), {}};
  out.sentences.reserve(corpus.size());
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const auto& sentence = corpus.sentences[si];
    Sentence projected;
    projected.tokens.reserve(sentence.size());
    for (std::size_t ti = 0; ti < sentence.size(); ++ti) {
      const Token& t = sentence.tokens[ti];
      const std::string* base = &t.surface;
      if (lemma) {
        if (!t.lemma) throw DataError("view " + std::string(to_string(view)) + ": " +
                                      location(si, ti, t) + " has no lemma factor");
        base = &*t.lemma;
      } else if (pos) {
        if (!t.pos) throw DataError("view " + std::string(to_string(view)) + ": " +
                                    location(si, ti, t) + " has no POS factor");
        base = &*t.pos;
      }
      const std::string& value = (with_ne && t.ne) ? *t.ne : *base;
      projected.tokens.push_back(Token{value, std::nullopt, std::nullopt, std::nullopt});
    }
    out.sentences.push_back(std::move(projected));
  }
  return out;
}

ParallelCorpus factor_view(const ParallelCorpus& corpus, FactorView view) {
  return parallel_from_sides(factor_view(corpus.source_side(), view),
                             factor_view(corpus.target_side(), view), corpus.id);
}

}  // namespace domsel::corpus
