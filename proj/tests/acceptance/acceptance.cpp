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

// One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "domsel/combine.hpp"
#include "domsel/corpus.hpp"
#include "domsel/lm.hpp"
#include "domsel/metrics.hpp"
#include "domsel/retrieve.hpp"
#include "domsel/select.hpp"
#include "domsel/util.hpp"
#include "domsel/webfilter.hpp"
#include "support/bleu_oracle.hpp"
#include "support/lm_oracle.hpp"
#include "support/select_oracle.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"
#include "support/webfilter_oracle.hpp"

using namespace domsel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::vector<std::string>> words_of(const corpus::Corpus& c) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : c.sentences) out.push_back(s.surfaces());
  return out;
}

corpus::Corpus random_corpus(Rng& rng, std::size_t max_sentences, std::size_t max_len, std::size_t vocab) {
  std::vector<std::string> lines;
  const auto n = 1 + rng.below(max_sentences);
  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    const auto len = 1 + rng.below(max_len);
    for (std::size_t j = 0; j < len; ++j) {
      if (j) line += ' ';
      line += "w" + std::to_string(rng.below(vocab));
    }
    lines.push_back(line);
  }
  return corpus::corpus_from_lines(lines);
}

std::vector<std::string> history_words(const lm::NGramModel& m, const std::vector<lm::WordId>& ctx) {
  std::vector<std::string> out;
  for (auto id : ctx) out.push_back(id == lm::Vocabulary::kBosId ? "<s>" : m.vocabulary().word(id));
  return out;
}

double context_mass(const lm::NGramModel& m, const std::vector<lm::WordId>& ctx) {
  double sum = 0.0;
  for (lm::WordId w = 0; w < m.vocabulary().size(); ++w) {
    if (w != lm::Vocabulary::kBosId) sum += m.prob(ctx, w);
  }
  return sum;
}

class UniformLM : public lm::LanguageModel {
 public:
  explicit UniformLM(double events) : p_(1.0 / events) {}
  std::vector<double> event_probs(std::span<const std::string> words) const override {
    return std::vector<double>(words.size() + 1, p_);
  }

 private:
  double p_;
};

corpus::Corpus domain_corpus(const test::DomainSpec& spec, std::size_t n, Rng& rng) {
  const test::ZipfSampler z(spec.vocab, spec.exponent);
  corpus::Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.sentences.push_back(corpus::sentence_from_words(test::domain_sentence(spec, z, rng)));
  return c;
}

// 1
Outcome lm_correctness() {
  Outcome o;
  Rng rng(2024);
  std::size_t contexts = 0, ratios = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_corpus(rng, 8, 7, 6);
    const auto sentences = words_of(c);
    for (auto s : {lm::Smoothing::mle, lm::Smoothing::witten_bell, lm::Smoothing::modified_kneser_ney}) {
      for (int order = 1; order <= 3; ++order) {
        const auto m = lm::train(c, order, s);
        for (int k = 1; k <= order; ++k) {
          for (const auto& ctx : m.contexts(k)) {
            const double mass = context_mass(m, ctx);
            ++contexts;
            o.expect(std::abs(mass - 1.0) <= 1e-6, "context mass " + fmt("%.12g", mass));
          }
        }
        if (s != lm::Smoothing::mle) continue;
        // Stored top-order n-grams against raw counts.
        const test::OracleLM oracle(sentences, order, "mle");
        for (const auto& ctx : m.contexts(order)) {
          const auto history = history_words(m, ctx);
          for (const auto& w : oracle.events()) {
            auto gram = history;
            gram.push_back(w);
            const double n = oracle.count(gram);
            if (n == 0) continue;
            const double expected = n / oracle.context_count(history);
            ++ratios;
            o.expect(m.prob(ctx, m.vocabulary().id(w)) == expected, "MLE ratio mismatch");
          }
        }
      }
    }
  }
  o.detail = std::to_string(contexts) + " contexts, " + std::to_string(ratios) + " MLE ratios";
  return o;
}

// 2
Outcome perplexity_identities() {
  Outcome o;
  Rng rng(7);
  for (double v : {2.0, 5.0, 17.0, 1000.0}) {
    const auto c = random_corpus(rng, 20, 10, 30);
    const double pp = lm::perplexity(UniformLM(v), c);
    o.expect(std::abs(pp - v) <= 1e-9 * v, "uniform V=" + fmt("%g", v) + " gives " + fmt("%.15g", pp));
  }
  // A trained MLE unigram whose events are equally frequent.
  const auto balanced = corpus::corpus_from_lines({"a b c", "c b a", "b a c"});
  const auto uni = lm::train(balanced, 1, lm::Smoothing::mle);
  o.expect(std::abs(lm::perplexity(uni, balanced) - 4.0) <= 4e-9, "balanced MLE unigram");

  std::size_t checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto train_c = random_corpus(rng, 10, 8, 8);
    const auto test_c = random_corpus(rng, 10, 8, 10);
    for (auto s : {lm::Smoothing::mle, lm::Smoothing::witten_bell, lm::Smoothing::modified_kneser_ney}) {
      const auto m = lm::train(train_c, 1 + trial % 3, s);
      for (const auto* c : {&train_c, &test_c}) {
        const auto score = lm::evaluate(m, *c);
        const double pp = score.perplexity();
        const double via_h = std::pow(2.0, score.cross_entropy());
        ++checked;
        o.expect(std::abs(pp - via_h) <= 1e-9 * via_h, "pp != 2^H");
        o.expect(std::abs(lm::perplexity(m, *c) - pp) <= 1e-9 * pp, "perplexity() disagrees with evaluate()");
      }
    }
  }
  o.detail = "4 uniform models, " + std::to_string(checked) + " pp = 2^H checks";
  return o;
}

// 3
Outcome mixture_em() {
  Outcome o;
  Rng rng(99);
  const test::DomainSpec a{"aa", 60}, b{"bb", 60};
  double worst_gap = 0.0;
  int toys = 0;
  for (double share : {0.0, 0.2, 0.5, 0.7, 0.9, 1.0}) {
    for (int order : {1, 2}) {
      const auto ca = domain_corpus(a, 300, rng);
      const auto cb = domain_corpus(b, 300, rng);
      auto ma = std::make_shared<lm::NGramModel>(lm::train(ca, order, lm::Smoothing::witten_bell));
      auto mb = std::make_shared<lm::NGramModel>(lm::train(cb, order, lm::Smoothing::witten_bell));
      corpus::Corpus dev;
      const auto da = domain_corpus(a, 200, rng), db = domain_corpus(b, 200, rng);
      for (std::size_t i = 0; i < 200; ++i) dev.sentences.push_back(rng.unit() < share ? da.sentences[i] : db.sentences[i]);

      lm::InterpolationTrace trace;
      const auto mix = lm::interpolate({ma, mb}, dev, {}, &trace);
      ++toys;
      for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i) {
        o.expect(trace.log_likelihood[i] >= trace.log_likelihood[i - 1], "log-likelihood decreased");
      }
      const double mix_pp = lm::perplexity(mix, dev);
      const double best_component = std::min(lm::perplexity(*ma, dev), lm::perplexity(*mb, dev));
      o.expect(mix_pp <= best_component + 1e-6, "mixture worse than a component at share " + fmt("%g", share));

      double grid_w = 0.0, grid_pp = INFINITY;
      for (int step = 0; step <= 100; ++step) {
        const double w = step / 100.0;
        const double pp = lm::perplexity(lm::MixtureModel({ma, mb}, {w, 1.0 - w}), dev);
        if (pp < grid_pp) {
          grid_pp = pp;
          grid_w = w;
        }
      }
      const double gap = std::abs(mix.weights()[0] - grid_w);
      worst_gap = std::max(worst_gap, gap);
      o.expect(gap <= 0.02, "weight " + fmt("%.4f", mix.weights()[0]) + " vs grid " + fmt("%.2f", grid_w));
    }
  }
  o.detail = std::to_string(toys) + " toys, max |w - grid| " + fmt("%.4f", worst_gap);
  return o;
}

// 4
Outcome criterion_separation() {
  Outcome o;
  const auto bench = test::make_two_domain(5000, 5000, 4242);
  const auto general = bench.general.source_side();
  const auto reference = bench.reference.source_side();
  const auto auc_of = [&](const select::CriterionScores& s) {
    return test::roc_auc(s.scores, bench.in_domain, s.direction == select::Direction::higher_is_better);
  };
  select::SelectionSetup setup;
  std::ostringstream detail;
  for (auto c : {select::Criterion::cosine, select::Criterion::cross_entropy, select::Criterion::moore_lewis}) {
    setup.criterion = c;
    const double auc = auc_of(select::score_corpus(general, reference, setup));
    detail << select::to_string(c) << ' ' << fmt("%.4f", auc) << ", ";
    o.expect(auc >= 0.9, std::string(select::to_string(c)) + " AUC " + fmt("%.4f", auc));
  }
  setup.criterion = select::Criterion::bilingual_moore_lewis;
  const double mml = auc_of(select::score_parallel(bench.general, bench.reference, setup));
  detail << "mml " << fmt("%.4f", mml) << ", ";
  o.expect(mml >= 0.9, "mml AUC " + fmt("%.4f", mml));

  corpus::Corpus small_ref;
  small_ref.sentences.assign(reference.sentences.begin(), reference.sentences.begin() + 500);
  setup.criterion = select::Criterion::fms;
  const double fms = auc_of(select::score_corpus(general, small_ref, setup));
  detail << "fms " << fmt("%.4f", fms);
  o.expect(fms >= 0.8, "fms AUC " + fmt("%.4f", fms));
  o.detail = detail.str();
  return o;
}

// 5
Outcome moore_lewis_degeneracy() {
  Outcome o;
  const auto bench = test::make_two_domain(300, 400, 55);
  const auto gs = bench.general.source_side(), gt = bench.general.target_side();
  const auto rs = bench.reference.source_side(), rt = bench.reference.target_side();
  const auto os = select::sample_subset(gs, 300, 1), ot = select::sample_subset(gt, 300, 1);
  const auto in_s = lm::train(rs, 3, lm::Smoothing::modified_kneser_ney);
  const auto in_t = lm::train(rt, 3, lm::Smoothing::modified_kneser_ney);
  lm::TrainOptions shared_s{3, lm::Smoothing::modified_kneser_ney, in_s.vocabulary()};
  lm::TrainOptions shared_t{3, lm::Smoothing::modified_kneser_ney, in_t.vocabulary()};
  const auto out_s = lm::train(os, shared_s), out_t = lm::train(ot, shared_t);

  for (double v : select::score_moore_lewis(gs, in_s, in_s)) o.expect(v == 0.0, "ML(in, in) != 0");
  const auto src = select::score_moore_lewis(gs, in_s, out_s);
  const auto tgt = select::score_moore_lewis(gt, in_t, out_t);
  const auto both = select::score_bilingual_ml(bench.general, in_s, out_s, in_t, out_t);
  double worst = 0.0;
  for (std::size_t i = 0; i < both.size(); ++i) worst = std::max(worst, std::abs(both[i] - (src[i] + tgt[i])));
  o.expect(worst <= 1e-12, "bilingual != source + target by " + fmt("%.3g", worst));
  o.detail = std::to_string(both.size()) + " sentences, max deviation " + fmt("%.3g", worst);
  return o;
}

// 6
Outcome fms_oracle() {
  Outcome o;
  std::mt19937 gen(6);
  std::uniform_int_distribution<int> len(1, 25), tok(0, 7);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> a(static_cast<std::size_t>(len(gen))), b(static_cast<std::size_t>(len(gen)));
    for (auto& t : a) t = "t" + std::to_string(tok(gen));
    for (auto& t : b) t = "t" + std::to_string(tok(gen));
    const double expected =
        1.0 - static_cast<double>(test::levenshtein_matrix(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
    o.expect(select::fuzzy_match_score(a, b) == expected, "FMS differs from the DP oracle");
    o.expect(select::word_edit_distance(a, b) == test::levenshtein_matrix(a, b), "edit distance differs");
  }
  o.detail = "1000 pairs";
  return o;
}

// 7
Outcome retrieval() {
  Outcome o;
  Rng rng(4711);
  const test::ZipfSampler zipf(20000, 1.0);
  std::vector<retrieve::Document> targets, sources;
  retrieve::Gold gold;
  std::vector<std::pair<std::size_t, std::size_t>> lengths;
  for (int i = 0; i < 500; ++i) {
    const std::size_t len = 100 + rng.below(201);
    std::vector<std::string> words;
    for (std::size_t k = 0; k < len; ++k) words.push_back("v" + std::to_string(zipf(rng)));
    // 20% of positions are disturbed. A net length change of up to 5% is
    // realized by insertions or deletions among them, the rest substitute,
    // so every pair stays inside the 4-delta window.
    const auto noised = static_cast<std::size_t>(0.2 * static_cast<double>(len));
    const auto shift = static_cast<long>(rng.below(2 * (len / 20) + 1)) - static_cast<long>(len / 20);
    std::vector<std::size_t> positions(len);
    for (std::size_t k = 0; k < len; ++k) positions[k] = k;
    for (std::size_t k = 0; k < noised; ++k) std::swap(positions[k], positions[k + rng.below(len - k)]);
    std::vector<char> op(len, 'k');
    for (std::size_t k = 0; k < noised; ++k) {
      const bool resize = k < static_cast<std::size_t>(std::labs(shift));
      op[positions[k]] = resize ? (shift > 0 ? 'i' : 'd') : 's';
    }
    std::vector<std::string> noisy;
    for (std::size_t k = 0; k < len; ++k) {
      switch (op[k]) {
        case 'k': noisy.push_back(words[k]); break;
        case 's': noisy.push_back("v" + std::to_string(zipf(rng))); break;
        case 'd': break;
        default:
          noisy.push_back(words[k]);
          noisy.push_back("v" + std::to_string(zipf(rng)));
      }
    }
    const std::string id = "doc" + std::to_string(1000 + i);
    targets.push_back({"t" + id, words});
    sources.push_back({"s" + id, noisy});
    gold["s" + id] = {"t" + id};
    lengths.emplace_back(noisy.size(), words.size());
  }
  const retrieve::DocumentIndex index(targets);
  const auto t0 = std::chrono::steady_clock::now();
  const auto eval = [&](const retrieve::RetrieveOptions& opts) {
    const auto hits = retrieve::retrieve_all(sources, index, opts);
    retrieve::Results results;
    std::size_t correct_at_1 = 0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      auto& row = results[sources[i].id];
      for (const auto& h : hits[i]) row.push_back(h.id);
      correct_at_1 += !hits[i].empty() && gold[sources[i].id].count(hits[i][0].id);
    }
    return std::pair{static_cast<double>(correct_at_1) / static_cast<double>(sources.size()),
                     retrieve::evaluate_retrieval(results, gold)};
  };
  const double delta = retrieve::estimate_delta(lengths);
  const auto [p1, plain] = eval({0.18, 1, std::nullopt});
  o.expect(p1 >= 0.95, "precision@1 " + fmt("%.3f", p1));
  std::string detail = "P@1 " + fmt("%.3f", p1) + ", delta " + fmt("%.4f", delta);
  for (std::size_t n_best : {1, 5}) {
    const auto unfiltered = eval({0.18, n_best, std::nullopt}).second;
    const auto filtered = eval({0.18, n_best, retrieve::LengthFilterParams{delta, 4.0}}).second;
    o.expect(filtered.f1 >= unfiltered.f1, "n-best " + std::to_string(n_best) + ": filtered F1 " +
                                               fmt("%.4f", filtered.f1) + " < " + fmt("%.4f", unfiltered.f1));
    detail += ", F1@" + std::to_string(n_best) + " " + fmt("%.4f", unfiltered.f1) + " -> " + fmt("%.4f", filtered.f1);
  }
  const double elapsed = seconds_since(t0);
  o.expect(elapsed < 60.0, "retrieval took " + fmt("%.1f", elapsed) + " s");
  o.detail = detail;
  return o;
}

webfilter::TopicTerm topic_term(std::string_view text, double weight) {
  webfilter::TopicTerm t;
  for (auto w : split_whitespace(text)) t.tokens.emplace_back(w);
  t.weight = weight;
  return t;
}

webfilter::LocatedDocument random_located(std::mt19937& gen, const std::string& id, const std::string& alphabet) {
  webfilter::LocatedDocument d{id, {}};
  std::uniform_int_distribution<int> lines(0, 3), len(1, 12);
  std::uniform_int_distribution<std::size_t> tok(0, alphabet.size() - 1);
  for (auto& loc : d.lines) {
    for (int l = lines(gen); l > 0; --l) {
      std::vector<std::string> line;
      for (int k = len(gen); k > 0; --k) line.push_back(std::string(1, alphabet[tok(gen)]));
      loc.push_back(line);
    }
  }
  if (d.lines[3].empty()) d.lines[3].push_back({std::string(1, alphabet[0])});
  return d;
}

// 8
Outcome topic_relevance() {
  Outcome o;
  std::mt19937 gen(808);
  const webfilter::TopicDefinition topic{{topic_term("a", 1), topic_term("a b", 2), topic_term("c c", 2.5),
                                          topic_term("d e f", 0.5), topic_term("b", 1.5)}};
  webfilter::LocationWeights lw;
  lw.w = {7.0, 3.5, 1.25, 1.0};
  std::vector<webfilter::LocatedDocument> docs;
  for (int i = 0; i < 100; ++i) docs.push_back(random_located(gen, "doc" + std::to_string(100 + i), "abcdef"));
  const auto scores = webfilter::topic_relevance(docs, topic, lw);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    o.expect(scores[i] == test::brute_force_relevance(docs[i], topic, lw), "relevance differs from the oracle");
  }
  for (double s : {0.5, 3.0, 1000.0}) {
    auto scaled_topic = topic;
    for (auto& t : scaled_topic.terms) t.weight *= s;
    auto scaled_lw = lw;
    for (auto& w : scaled_lw.w) w *= 2.0;
    const auto scaled = webfilter::topic_relevance(docs, scaled_topic, scaled_lw);
    o.expect(webfilter::filter_documents_topk(docs, scaled, 100) == webfilter::filter_documents_topk(docs, scores, 100),
             "ranking changed under scaling by " + fmt("%g", s));
  }

  std::vector<std::string> train_lines;
  for (int i = 0; i < 200; ++i) {
    std::string line;
    for (int k = 0; k < 8; ++k) line += std::string(k ? " " : "") + std::string(1, "abcdef"[gen() % 6]);
    train_lines.push_back(line);
  }
  const auto model = lm::train(corpus::corpus_from_lines(train_lines), 2, lm::Smoothing::witten_bell);
  std::vector<const webfilter::LocatedDocument*> all;
  for (const auto& d : docs) all.push_back(&d);
  for (double n : {10.0, 50.0, 100.0}) {
    const auto combined = webfilter::combined_filter(docs, topic, lw, 100, n, model);
    const auto plain = webfilter::rank_sentences_by_ppl1(all, model, n);
    bool same = combined.size() == plain.size();
    for (std::size_t i = 0; same && i < plain.size(); ++i) {
      same = combined[i].doc_id == plain[i].doc_id && combined[i].line == plain[i].line;
    }
    o.expect(same, "K=100 differs from ppl1 selection at N=" + fmt("%g", n));
  }
  o.detail = "100 documents, 3 scalings, N in {10, 50, 100}";
  return o;
}

// 9
Outcome bleu_properties() {
  Outcome o;
  const auto tok = [](std::initializer_list<const char*> lines) {
    metrics::TokenLines out;
    for (const char* l : lines) {
      auto& row = out.emplace_back();
      for (auto w : split_whitespace(l)) row.emplace_back(w);
    }
    return out;
  };
  const auto ref = tok({"the cat sat on the mat today", "there is a cat on the mat near the door"});
  o.expect(metrics::bleu(ref, ref).score == 1.0, "identity is not 1");
  const auto hyp = tok({"the the cat sat on the mat", "a cat is on the mat near a door"});
  const double got = metrics::bleu(hyp, ref).score;
  const double want = test::oracle_bleu(hyp, ref);
  o.expect(std::abs(got - want) <= 1e-12, "hand case " + fmt("%.15g", got) + " vs " + fmt("%.15g", want));

  std::mt19937 gen(9);
  std::uniform_int_distribution<int> len(3, 15), w(0, 9);
  metrics::TokenLines h, r;
  for (int i = 0; i < 60; ++i) {
    for (auto* side : {&h, &r}) {
      auto& row = side->emplace_back();
      for (int k = len(gen); k > 0; --k) row.push_back("w" + std::to_string(w(gen)));
    }
  }
  const double base = metrics::bleu(h, r).score;
  std::vector<std::size_t> perm(h.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), gen);
    metrics::TokenLines ph, pr;
    for (auto i : perm) {
      ph.push_back(h[i]);
      pr.push_back(r[i]);
    }
    o.expect(metrics::bleu(ph, pr).score == base, "sentence order changed BLEU");
  }
  o.detail = "hand case " + fmt("%.6f", got) + ", 10 permutations";
  return o;
}

// 10
Outcome selection_properties() {
  Outcome o;
  const auto bench = test::make_two_domain(300, 1000, 10);
  const auto general = bench.general.source_side();
  const auto reference = bench.reference.source_side();
  select::SelectionSetup setup;
  const auto full_types = metrics::vocab_stats(general).types;
  std::size_t worst_types = 0;
  for (auto c : {select::Criterion::cosine, select::Criterion::cross_entropy, select::Criterion::moore_lewis}) {
    setup.criterion = c;
    const auto scores = select::score_corpus(general, reference, setup);
    std::vector<std::size_t> prev;
    for (double k = 1; k <= 100; k += 1) {
      const auto sel = select::select_top(scores, k).ranked;
      o.expect(sel.size() >= prev.size() && std::equal(prev.begin(), prev.end(), sel.begin()), "prefix nesting broken");
      if (k < 100) {
        corpus::Corpus sub;
        for (auto i : sel) sub.sentences.push_back(general.sentences[i]);
        const auto types = metrics::vocab_stats(sub).types;
        worst_types = std::max(worst_types, types);
        o.expect(types <= full_types, "subset vocabulary larger than the full corpus");
      }
      prev = sel;
    }
    o.expect(prev.size() == general.size(), "K=100 does not keep everything");
  }

  std::mt19937 gen(10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::set<std::size_t>> sets(2 + gen() % 3);
    for (auto& s : sets) {
      for (int k = static_cast<int>(gen() % 30); k > 0; --k) s.insert(gen() % 40);
    }
    if (std::all_of(sets.begin(), sets.end(), [](const auto& s) { return s.empty(); })) sets[0].insert(1);
    std::set<std::size_t> inter = sets[0], uni;
    for (const auto& s : sets) {
      std::set<std::size_t> next;
      std::set_intersection(inter.begin(), inter.end(), s.begin(), s.end(), std::inserter(next, next.begin()));
      inter = next;
      uni.insert(s.begin(), s.end());
    }
    const auto stats = metrics::overlap_stats(sets);
    o.expect(stats.intersection == inter.size() && stats.union_size == uni.size(), "overlap counts differ");
    o.expect(stats.overlap == static_cast<double>(inter.size()) / static_cast<double>(uni.size()), "overlap ratio differs");
    for (std::size_t i = 0; i < sets.size(); ++i) {
      std::set<std::size_t> others;
      for (std::size_t j = 0; j < sets.size(); ++j) {
        if (j != i) others.insert(sets[j].begin(), sets[j].end());
      }
      std::set<std::size_t> only;
      std::set_difference(sets[i].begin(), sets[i].end(), others.begin(), others.end(), std::inserter(only, only.begin()));
      const double want = sets[i].empty() ? 0.0 : static_cast<double>(only.size()) / static_cast<double>(sets[i].size());
      o.expect(stats.unique.at(i) == want, "unique share differs");
    }
  }
  o.detail = "3 criteria x 100 K values, 200 overlap trials, vocabulary " + std::to_string(worst_types) +
             " <= " + std::to_string(full_types);
  return o;
}

// 11
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string without_duration(const std::string& manifest) {
  std::istringstream in(manifest);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("duration_seconds=", 0) != 0) out += line + "\n";
  }
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

Outcome determinism() {
  Outcome o;
  test::TempDir dir;
  const auto bench = test::make_two_domain(400, 1200, 11);
  const auto gen_src = corpus::format_corpus(bench.general.source_side());
  const auto ref_src = corpus::format_corpus(bench.reference.source_side());
  const auto gen_tgt = corpus::format_corpus(bench.general.target_side());
  const auto ref_tgt = corpus::format_corpus(bench.reference.target_side());
  std::string docs_src, docs_tgt, dev;
  Rng rng(12);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& s = bench.general.pairs[i];
    docs_src += "d" + std::to_string(i) + "\t" + s.source.text() + "\n";
    docs_tgt += "d" + std::to_string(i) + "\t" + s.source.text() + " extra\n";
  }
  for (std::size_t i = 0; i < 50; ++i) dev += bench.general.pairs[1000 + i].source.text() + "\n";

  const std::vector<std::string> steps{
      "preprocess -i gen.txt --dedup --max-len 80 -o gen.clean",
      "preprocess -i gen.txt --sample 400 --seed 3 -o gen.sample",
      "preprocess -i gen_t.txt --sample 400 --seed 3 -o gen_t.sample",
      "train-lm -i ref.txt --order 3 -o in.arpa",
      "train-lm -i gen.sample --order 3 --vocab-from ref.txt -o out.arpa",
      "train-lm -i ref_t.txt --order 3 -o in_t.arpa",
      "train-lm -i gen_t.sample --order 3 --vocab-from ref_t.txt -o out_t.arpa",
      "perplexity --lm in.arpa -i gen.clean -o pp.tsv",
      "score --criterion cosine --general gen.clean --reference ref.txt -o cos.scores",
      "score --criterion fms --general gen.clean --reference ref.txt -o fms.scores",
      "score --criterion ce --general gen.clean --in-lm in.arpa -o ce.scores",
      "score --criterion ml --general gen.clean --in-lm in.arpa --out-lm out.arpa -o ml.scores",
      "score --criterion mml --general gen.tsv --format tsv --in-lm in.arpa --out-lm out.arpa --in-lm-target in_t.arpa "
      "--out-lm-target out_t.arpa -o mml.scores",
      "select --scores cos.scores --k 20 -o cos.sel",
      "select --scores fms.scores --k 20 -o fms.sel",
      "select --scores ce.scores --k 20 -o ce.sel",
      "select --scores ml.scores --k 20 -o ml.sel",
      "select --scores mml.scores --theta 0 -o mml.sel",
      "combine corpus --selection ml.sel --selection cos.sel --weight 2 --weight 1 --corpus gen.clean -o union.txt",
      "combine naive-rank --selection ml.sel --selection cos.sel --selection fms.sel --size 300 -o naive.sel",
      "combine corpus --selection naive.sel --corpus gen.clean --replicate -o naive.txt",
      "train-lm -i naive.txt --order 3 -o naive.arpa",
      "combine lm-interp --lm in.arpa --lm naive.arpa --dev dev.txt -o interp.tsv",
      "diagnose --source gen.clean --selection ml=ml.sel --selection cos=cos.sel --test dev.txt -o diag.tsv",
      "retrieve --sources docs_s.tsv --targets docs_t.tsv --n-best 2 -o retrieved.tsv",
      "bleu --hyp gen.clean --ref gen.clean -o bleu.tsv",
  };

  const fs::path runs[2] = {dir / "a", dir / "b"};
  for (int r = 0; r < 2; ++r) {
    fs::create_directories(runs[r]);
    write_file(runs[r] / "gen.txt", gen_src);
    write_file(runs[r] / "ref.txt", ref_src);
    write_file(runs[r] / "gen_t.txt", gen_tgt);
    write_file(runs[r] / "ref_t.txt", ref_tgt);
    write_file(runs[r] / "gen.tsv", corpus::format_parallel_tsv(bench.general));
    write_file(runs[r] / "docs_s.tsv", docs_src);
    write_file(runs[r] / "docs_t.tsv", docs_tgt);
    write_file(runs[r] / "dev.txt", dev);
    for (const auto& step : steps) {
      const std::string cmd = "cd '" + runs[r].string() + "' && '" DOMSEL_TOOL "' --threads " + (r == 0 ? "1" : "8") +
                              " " + step + " 2>>log.txt";
      const int rc = std::system(cmd.c_str());
      o.expect(rc == 0, "step failed: " + step);
      if (rc != 0) return o;
    }
  }

  std::size_t outputs = 0, manifests = 0;
  for (const auto& entry : fs::directory_iterator(runs[0])) {
    const auto name = entry.path().filename().string();
    if (name == "log.txt") continue;
    const auto a = slurp(entry.path()), b = slurp(runs[1] / name);
    if (name.size() > 9 && name.ends_with(".manifest")) {
      ++manifests;
      o.expect(!a.empty() && without_duration(a) == without_duration(b), "manifest differs: " + name);
    } else {
      ++outputs;
      o.expect(a == b, "output differs: " + name);
    }
  }
  o.expect(manifests == steps.size(), "expected one manifest per step");
  o.detail = std::to_string(steps.size()) + " steps, " + std::to_string(outputs) + " files and " +
             std::to_string(manifests) + " manifests compared";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 means no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  set_log_sink([](std::string_view) {});
  const std::vector<Criterion> criteria{
      {1, "LM correctness", 30, lm_correctness},
      {2, "perplexity identities", 0, perplexity_identities},
      {3, "mixture EM", 0, mixture_em},
      {4, "criterion separation", 120, criterion_separation},
      {5, "Moore-Lewis degeneracy", 0, moore_lewis_degeneracy},
      {6, "FMS oracle", 0, fms_oracle},
      {7, "retrieval reproduction", 60, retrieval},
      {8, "topic relevance", 0, topic_relevance},
      {9, "BLEU", 0, bleu_properties},
      {10, "selection and diagnostics", 0, selection_properties},
      {11, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(t0);
    if (c.budget_seconds > 0) o.expect(elapsed < c.budget_seconds, "over the " + fmt("%g", c.budget_seconds) + " s budget");
    failed += !o.pass;
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), elapsed);
    for (const auto& f : o.failures) std::printf("     - %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
