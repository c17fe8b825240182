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

#include <filesystem>
#include <regex>

#include "doctest.h"
#include "domsel/corpus.hpp"
#include "domsel/error.hpp"
#include "domsel/util.hpp"
#include "support/temp_dir.hpp"

using namespace domsel;
using namespace domsel::corpus;

namespace {

Corpus mono(std::initializer_list<const char*> lines) {
  std::vector<std::string> v(lines.begin(), lines.end());
  return corpus_from_lines(v, "test");
}

ParallelCorpus para(std::initializer_list<std::pair<const char*, const char*>> rows) {
  ParallelCorpus pc{"test", {}};
  for (const auto& [s, t] : rows) pc.pairs.push_back({sentence_from_text(s), sentence_from_text(t)});
  return pc;
}

std::vector<std::string> texts(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& s : c.sentences) out.push_back(s.text());
  return out;
}

// Strips <alt ...> and </alt> wrappers.
std::string strip_alt(const std::string& s) {
  static const std::regex open("<alt trans=\"[^\"]*\">");
  return std::regex_replace(std::regex_replace(s, open, ""), std::regex("</alt>"), "");
}

const char* kFactored =
    "America|america|NNP|NP00G00 's|'s|POS appallingly|appallingly|RB low|low|JJ "
    "savings|saving|NNS rate|rate|NN .|.|Fp";

}  // namespace

TEST_CASE("load_corpus reads plain, factored and parallel formats") {
  test::TempDir dir;
  const auto src = dir.write("a.src", "one two\nthree\nfour five six\n");
  const auto tgt = dir.write("a.tgt", "uno dos\ntres\ncuatro cinco seis\n");
  const auto bad = dir.write("b.tgt", "uno\ndos\ntres\ncuatro\n");

  SUBCASE("two 3-line files make 3 pairs") {
    const auto pc = load_parallel(src, tgt);
    CHECK(pc.size() == 3);
    CHECK(pc.pairs[2].target.text() == "cuatro cinco seis");
  }
  SUBCASE("a leading manifest header is not a sentence") {
    const auto c = load_monolingual(dir.write("h.txt", "# manifest: h.txt.manifest\n# kept\nx\n"));
    REQUIRE(c.size() == 2);
    CHECK(c.sentences[0].text() == "# kept");
  }
  SUBCASE("line-count mismatch is an error") {
    CHECK_THROWS_AS(load_parallel(src, bad), DataError);
  }
  SUBCASE("factored token carries all four factors") {
    const auto path = dir.write("f.txt", "america|america|NNP|NP00G00\n");
    const auto c = std::get<Corpus>(load_corpus(path, Format::factored));
    const Token& t = c.sentences[0].tokens[0];
    CHECK(t.surface == "america");
    CHECK(t.lemma == "america");
    CHECK(t.pos == "NNP");
    CHECK(t.ne == "NP00G00");
  }
  SUBCASE("missing trailing factors read as absent") {
    const Token t = parse_factored_token("'s|'s|POS");
    CHECK(t.pos == "POS");
    CHECK_FALSE(t.ne.has_value());
    CHECK(format_factored_token(t) == "'s|'s|POS");
  }
  SUBCASE("too many factors is an error") {
    CHECK_THROWS_AS(parse_factored_token("a|b|c|d|e"), DataError);
  }
  SUBCASE("tsv parallel") {
    const auto path = dir.write("p.tsv", "a b\tx y\nc\tz\n");
    const auto pc = std::get<ParallelCorpus>(load_corpus(path, Format::tsv_parallel));
    CHECK(pc.size() == 2);
    CHECK(format_parallel_tsv(pc) == "a b\tx y\nc\tz\n");
  }
  SUBCASE("empty lines are rejected") {
    const auto path = dir.write("e.txt", "a\n\nb\n");
    CHECK_THROWS_AS(load_monolingual(path), DataError);
  }
  SUBCASE("non-UTF-8 bytes are rejected") {
    const auto path = dir.write("u.txt", std::string("ok\n\xff\xfe bad\n"));
    CHECK_THROWS_AS(load_monolingual(path), DataError);
  }
  SUBCASE("plain writer reproduces the input bytes") {
    const auto c = load_monolingual(src);
    CHECK(format_corpus(c) == "one two\nthree\nfour five six\n");
  }
}

TEST_CASE("dedup keeps first occurrences") {
  CHECK(texts(dedup(mono({"a", "a", "b"}))) == std::vector<std::string>{"a", "b"});

  const auto pc = dedup(para({{"a", "x"}, {"a", "x"}, {"a", "y"}}));
  REQUIRE(pc.size() == 2);
  CHECK(pc.pairs[0].target.text() == "x");
  CHECK(pc.pairs[1].target.text() == "y");

  const auto distinct = mono({"c", "b", "a"});
  CHECK(texts(dedup(distinct)) == texts(distinct));
}

TEST_CASE("dedup is idempotent and order preserving on random corpora") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> lines;
    const auto n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) lines.push_back("w" + std::to_string(rng.below(6)));
    const auto c = corpus_from_lines(lines);
    const auto once = dedup(c);
    CHECK(texts(dedup(once)) == texts(once));
    // Subsequence of the input.
    std::size_t j = 0;
    for (const auto& s : c.sentences) {
      if (j < once.size() && s == once.sentences[j]) ++j;
    }
    CHECK(j == once.size());
  }
}

TEST_CASE("length_filter uses strictly-more-than") {
  std::string w80, w81;
  for (int i = 0; i < 80; ++i) w80 += (i ? " w" : "w");
  w81 = w80 + " w";
  const auto pc = para({{w81.c_str(), "x"}, {w80.c_str(), w80.c_str()}, {"a", w81.c_str()}});
  const auto kept = length_filter(pc, 80);
  REQUIRE(kept.size() == 1);
  CHECK(kept.pairs[0].source.size() == 80);
  CHECK(length_filter(ParallelCorpus{}, 80).empty());
  CHECK_THROWS_AS(length_filter(pc, 0), ParameterError);
}

TEST_CASE("normalize_numbers replaces maximal digit runs") {
  CHECK(normalize_numbers("Vitamin D 1,25-OH") == "Vitamin D @num@,@num@-OH");
  CHECK(normalize_numbers("no digits here") == "no digits here");

  // Cross-check against a regular-expression pass.
  const std::string sample = "10-20 ml/kg";
  const std::string expected = std::regex_replace(sample, std::regex("[0-9]+"), "@num@");
  CHECK(expected == "@num@-@num@ ml/kg");
  CHECK(normalize_numbers(sample) == expected);

  const auto s = sentence_from_text("dose 2.5mg x3");
  const auto once = normalize_numbers(s);
  CHECK(once.text() == "dose @num@.@num@mg x@num@");
  CHECK(normalize_numbers(once) == once);
  CHECK(once.size() == s.size());
}

TEST_CASE("normalize_apostrophes maps U+2019 to ASCII") {
  CHECK(normalize_apostrophes("l\xE2\x80\x99homme") == "l'homme");
  CHECK(normalize_apostrophes("plain") == "plain");
}

TEST_CASE("hyphen_alt_markup") {
  Lexicon lex;
  lex.add("slow", "X");
  lex.add("growing", "Y");
  CHECK_FALSE(lex.add("slow", "Z"));  // first listed wins
  CHECK(*lex.lookup("slow") == "X");

  CHECK(hyphen_alt_markup(sentence_from_text("a slow-growing tumour"), lex) ==
        "a <alt trans=\"X Y\">slow-growing</alt> tumour");

  Lexicon partial;
  partial.add("slow", "X");
  CHECK(hyphen_alt_markup(sentence_from_text("slow-growing"), partial) == "slow-growing");
  CHECK(hyphen_alt_markup(sentence_from_text("no hyphen here"), lex) == "no hyphen here");

  SUBCASE("leading, trailing and doubled hyphens are not split points") {
    CHECK(split_hyphenated("-slow").size() == 1);
    CHECK(split_hyphenated("slow-").size() == 1);
    CHECK(split_hyphenated("slow--growing").size() == 1);
    CHECK(split_hyphenated("a-b-c").size() == 3);
  }

  SUBCASE("case-insensitive lookup on request") {
    Lexicon ci(false);
    ci.add("Slow", "X");
    CHECK(ci.lookup("SLOW").has_value());
    CHECK_FALSE(lex.lookup("Slow").has_value());
  }

  SUBCASE("stripping the markup reconstructs the input") {
    Rng rng(3);
    const char* parts[] = {"slow", "growing", "fast", "x", "-", "y"};
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::string> words;
      const auto n = 1 + rng.below(6);
      for (std::size_t i = 0; i < n; ++i) {
        std::string w = parts[rng.below(4)];
        const auto extra = rng.below(3);
        for (std::size_t k = 0; k < extra; ++k) w += std::string(parts[4 + rng.below(2)]) + parts[rng.below(4)];
        words.push_back(w);
      }
      const auto s = sentence_from_words(words);
      CHECK(strip_alt(hyphen_alt_markup(s, lex)) == s.text());
    }
  }
}

TEST_CASE("Lexicon::load parses tab and space separated entries") {
  test::TempDir dir;
  const auto path = dir.write("lex.txt", "slow\tlento\nslow\tdespacio\ngrowing creciente que crece\n");
  const auto lex = Lexicon::load(path);
  CHECK(lex.size() == 2);
  CHECK(*lex.lookup("slow") == "lento");
  CHECK(*lex.lookup("growing") == "creciente que crece");
}

TEST_CASE("factor_view projections") {
  const Corpus c{"fig", {sentence_from_factored(kFactored)}};
  CHECK(factor_view(c, FactorView::f).sentences[0].text() ==
        "America 's appallingly low savings rate .");
  CHECK(factor_view(c, FactorView::fn).sentences[0].text() ==
        "NP00G00 's appallingly low savings rate .");
  CHECK(factor_view(c, FactorView::l).sentences[0].text() ==
        "america 's appallingly low saving rate .");
  CHECK(factor_view(c, FactorView::ln).sentences[0].text() ==
        "NP00G00 's appallingly low saving rate .");
  CHECK(factor_view(c, FactorView::t).sentences[0].text() == "NNP POS RB JJ NNS NN Fp");
  CHECK(factor_view(c, FactorView::tn).sentences[0].text() == "NP00G00 POS RB JJ NNS NN Fp");

  SUBCASE("missing factors name the offending token") {
    const Corpus plain = corpus_from_lines({"a b"});
    try {
      factor_view(plain, FactorView::t);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }
    const Corpus partial{"p", {sentence_from_factored("a|a|DT b|b c|c|NN")}};
    try {
      factor_view(partial, FactorView::t);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
    CHECK_THROWS_AS(factor_view(plain, FactorView::fn), DataError);
  }

  SUBCASE("every view preserves sentence and token counts") {
    const Corpus many{"m", {sentence_from_factored(kFactored), sentence_from_factored("x|x|NN|ORG y|y|VB")}};
    for (auto v : {FactorView::f, FactorView::fn, FactorView::l, FactorView::ln, FactorView::t,
                   FactorView::tn}) {
      const auto p = factor_view(many, v);
      REQUIRE(p.size() == many.size());
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.sentences[i].size() == many.sentences[i].size());
    }
  }
  CHECK(parse_factor_view("ln") == FactorView::ln);
  CHECK_THROWS_AS(parse_factor_view("x"), ParameterError);
}
