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

// Python bindings. Corpora cross the boundary as lists of whitespace-tokenized
// sentence strings; parallel corpora as lists of (source, target) tuples.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <sstream>

#include "domsel/cli.hpp"
#include "domsel/combine.hpp"
#include "domsel/corpus.hpp"
#include "domsel/error.hpp"
#include "domsel/lm.hpp"
#include "domsel/metrics.hpp"
#include "domsel/retrieve.hpp"
#include "domsel/select.hpp"
#include "domsel/webfilter.hpp"

namespace py = pybind11;
using namespace domsel;

namespace {

using Lines = std::vector<std::string>;
using Pairs = std::vector<std::pair<std::string, std::string>>;

corpus::Corpus to_corpus(const Lines& lines) { return corpus::corpus_from_lines(lines); }

corpus::ParallelCorpus to_parallel(const Pairs& pairs) {
  corpus::ParallelCorpus pc;
  for (const auto& [s, t] : pairs) pc.pairs.push_back({corpus::sentence_from_text(s), corpus::sentence_from_text(t)});
  return pc;
}

Lines to_lines(const corpus::Corpus& c) {
  Lines out;
  for (const auto& s : c.sentences) out.push_back(s.text());
  return out;
}

metrics::TokenLines to_tokens(const Lines& lines) {
  metrics::TokenLines out;
  for (const auto& l : lines) out.push_back(corpus::sentence_from_text(l).surfaces());
  return out;
}

select::Direction direction_for(const std::string& criterion) {
  return select::direction_of(select::parse_criterion(criterion));
}

// Shared ownership so Python objects can also feed mixtures.
using ModelPtr = std::shared_ptr<lm::NGramModel>;

}  // namespace

PYBIND11_MODULE(_domsel, m) {
  m.doc() = "Domain-relevant data selection for n-gram and MT training corpora";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);

  // corpus
  m.def("dedup", [](const Lines& lines) { return to_lines(corpus::dedup(to_corpus(lines))); }, py::arg("sentences"));
  m.def(
      "length_filter",
      [](const Lines& lines, std::size_t max_len) { return to_lines(corpus::length_filter(to_corpus(lines), max_len)); },
      py::arg("sentences"), py::arg("max_len") = 80);
  m.def("normalize_numbers", py::overload_cast<std::string_view>(&corpus::normalize_numbers), py::arg("text"));
  m.def("normalize_apostrophes", py::overload_cast<std::string_view>(&corpus::normalize_apostrophes), py::arg("text"));
  m.def(
      "factor_view",
      [](const Lines& factored, const std::string& view) {
        corpus::Corpus c;
        for (const auto& l : factored) c.sentences.push_back(corpus::sentence_from_factored(l));
        return to_lines(corpus::factor_view(c, corpus::parse_factor_view(view)));
      },
      py::arg("factored_sentences"), py::arg("view"));

  // lm
  py::class_<lm::NGramModel, ModelPtr>(m, "NGramModel")
      .def_property_readonly("order", &lm::NGramModel::order)
      .def_property_readonly("smoothing",
                             [](const lm::NGramModel& model) { return std::string(lm::to_string(model.smoothing())); })
      .def(
          "event_probs",
          [](const lm::NGramModel& model, const std::string& sentence) {
            return model.event_probs(corpus::sentence_from_text(sentence).surfaces());
          },
          py::arg("sentence"), "One probability per word plus one for the end of sentence")
      .def(
          "log_prob",
          [](const lm::NGramModel& model, const std::string& sentence) {
            return lm::log_prob(model, corpus::sentence_from_text(sentence));
          },
          py::arg("sentence"))
      .def(
          "cross_entropy",
          [](const lm::NGramModel& model, const Lines& test, unsigned threads) {
            return lm::cross_entropy(model, to_corpus(test), threads);
          },
          py::arg("sentences"), py::arg("threads") = 1)
      .def(
          "perplexity",
          [](const lm::NGramModel& model, const Lines& test, unsigned threads) {
            return lm::perplexity(model, to_corpus(test), threads);
          },
          py::arg("sentences"), py::arg("threads") = 1)
      .def("to_arpa", [](const lm::NGramModel& model) { return lm::write_arpa(model); })
      .def("save", [](const lm::NGramModel& model, const std::string& path) { lm::save_arpa(model, path); },
           py::arg("path"));
  m.def(
      "train_lm",
      [](const Lines& lines, int order, const std::string& smoothing) {
        return std::make_shared<lm::NGramModel>(lm::train(to_corpus(lines), order, lm::parse_smoothing(smoothing)));
      },
      py::arg("sentences"), py::arg("order") = 4, py::arg("smoothing") = "mkn");
  m.def(
      "read_arpa", [](const std::string& text) { return std::make_shared<lm::NGramModel>(lm::read_arpa(text)); },
      py::arg("text"));
  m.def(
      "load_arpa", [](const std::string& path) { return std::make_shared<lm::NGramModel>(lm::load_arpa(path)); },
      py::arg("path"));
  m.def(
      "interpolate",
      [](const std::vector<ModelPtr>& models, const Lines& dev, double tolerance, int max_iterations) {
        std::vector<std::shared_ptr<const lm::LanguageModel>> parts(models.begin(), models.end());
        lm::InterpolationTrace trace;
        const auto mix = lm::interpolate(parts, to_corpus(dev), {tolerance, max_iterations}, &trace);
        py::dict out;
        out["weights"] = mix.weights();
        out["log_likelihood"] = trace.log_likelihood;
        out["iterations"] = trace.iterations;
        out["converged"] = trace.converged;
        out["dev_perplexity"] = lm::perplexity(mix, to_corpus(dev));
        return out;
      },
      py::arg("models"), py::arg("dev"), py::arg("tolerance") = 1e-6, py::arg("max_iterations") = 100,
      "EM-fitted mixture weights on a dev corpus");

  // select
  m.def(
      "score_cosine",
      [](const Lines& general, const Lines& in_domain, unsigned threads) {
        return select::score_cosine(to_corpus(general), to_corpus(in_domain), threads);
      },
      py::arg("general"), py::arg("in_domain"), py::arg("threads") = 1);
  m.def(
      "score_cross_entropy",
      [](const Lines& general, const lm::NGramModel& in_lm, unsigned threads) {
        return select::score_cross_entropy(to_corpus(general), in_lm, threads);
      },
      py::arg("general"), py::arg("in_lm"), py::arg("threads") = 1);
  m.def(
      "score_moore_lewis",
      [](const Lines& general, const lm::NGramModel& in_lm, const lm::NGramModel& out_lm, unsigned threads) {
        return select::score_moore_lewis(to_corpus(general), in_lm, out_lm, threads);
      },
      py::arg("general"), py::arg("in_lm"), py::arg("out_lm"), py::arg("threads") = 1);
  m.def(
      "score_bilingual_ml",
      [](const Pairs& general, const lm::NGramModel& in_src, const lm::NGramModel& out_src,
         const lm::NGramModel& in_tgt, const lm::NGramModel& out_tgt, unsigned threads) {
        return select::score_bilingual_ml(to_parallel(general), in_src, out_src, in_tgt, out_tgt, threads);
      },
      py::arg("general"), py::arg("in_src_lm"), py::arg("out_src_lm"), py::arg("in_tgt_lm"), py::arg("out_tgt_lm"),
      py::arg("threads") = 1);
  m.def(
      "word_edit_distance",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) { return select::word_edit_distance(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "fuzzy_match_score",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) { return select::fuzzy_match_score(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "score_fms",
      [](const Lines& general, const Lines& reference, bool fast, double cutoff, unsigned threads) {
        return select::score_fms(to_corpus(general), to_corpus(reference), {fast, cutoff, threads});
      },
      py::arg("general"), py::arg("reference"), py::arg("fast") = false, py::arg("cutoff") = 0.0,
      py::arg("threads") = 1);
  m.def(
      "score_corpus",
      [](const Lines& general, const Lines& reference, const std::string& criterion, int order,
         const std::string& smoothing, std::uint64_t seed, unsigned threads) {
        select::SelectionSetup setup;
        setup.criterion = select::parse_criterion(criterion);
        setup.order = order;
        setup.smoothing = lm::parse_smoothing(smoothing);
        setup.seed = seed;
        setup.threads = threads;
        setup.fms.threads = threads;
        return select::score_corpus(to_corpus(general), to_corpus(reference), setup).scores;
      },
      py::arg("general"), py::arg("reference"), py::arg("criterion") = "ml", py::arg("order") = 4,
      py::arg("smoothing") = "mkn", py::arg("seed") = 1, py::arg("threads") = 1,
      "Scores with LMs trained on the reference (and a seeded general sample for ml)");
  m.def(
      "rank",
      [](const std::vector<double>& scores, const std::string& criterion) {
        return select::rank(scores, direction_for(criterion));
      },
      py::arg("scores"), py::arg("criterion"), "Indices best first for the criterion's direction");
  m.def(
      "select_top",
      [](const std::vector<double>& scores, const std::string& criterion, double k_percent) {
        select::CriterionScores cs{criterion, direction_for(criterion), scores, {}};
        return select::select_top(cs, k_percent).ranked;
      },
      py::arg("scores"), py::arg("criterion"), py::arg("k_percent"));
  m.def(
      "threshold_filter",
      [](const std::vector<double>& scores, const std::string& criterion, double theta) {
        select::CriterionScores cs{criterion, direction_for(criterion), scores, {}};
        return select::threshold_filter(cs, theta).ranked;
      },
      py::arg("scores"), py::arg("criterion"), py::arg("theta"));

  // combine
  m.def("combine_naive_rank", &combine::combine_naive_rank, py::arg("lists"), py::arg("target_size"));
  m.def("partition_naive_rank", &combine::partition_naive_rank, py::arg("lists"), py::arg("target_size"));
  m.def(
      "interpolate_tables",
      [](const std::vector<std::string>& tables, const std::vector<double>& weights) {
        std::vector<combine::ProbTable> parsed;
        for (const auto& t : tables) parsed.push_back(combine::parse_prob_table(t));
        return combine::format_prob_table(combine::interpolate_tables(parsed, std::span<const double>(weights)));
      },
      py::arg("tables"), py::arg("weights"), "Tables in `src ||| tgt ||| scores` text form");

  // retrieve
  m.def(
      "retrieve",
      [](const Pairs& sources, const Pairs& targets, double lambda, std::size_t n_best, std::optional<double> delta,
         double multiplier, unsigned threads) {
        std::vector<retrieve::Document> src, tgt;
        for (const auto& [id, text] : sources) src.push_back(retrieve::make_document(id, text));
        for (const auto& [id, text] : targets) tgt.push_back(retrieve::make_document(id, text));
        const retrieve::DocumentIndex index(std::move(tgt));
        retrieve::RetrieveOptions opts;
        opts.lambda = lambda;
        opts.n_best = n_best;
        if (delta) opts.length_filter = retrieve::LengthFilterParams{*delta, multiplier};
        std::vector<std::vector<std::pair<std::string, double>>> out;
        for (const auto& hits : retrieve::retrieve_all(src, index, opts, {}, threads)) {
          auto& row = out.emplace_back();
          for (const auto& h : hits) row.emplace_back(h.id, h.score);
        }
        return out;
      },
      py::arg("sources"), py::arg("targets"), py::arg("lambda_") = 0.18, py::arg("n_best") = 1,
      py::arg("delta") = py::none(), py::arg("multiplier") = 4.0, py::arg("threads") = 1,
      "Sources and targets are (id, text) pairs; returns (target id, score) lists");
  m.def(
      "estimate_delta", [](const Pairs& pairs) { return retrieve::estimate_delta(to_parallel(pairs)); },
      py::arg("pairs"));
  m.def(
      "evaluate_retrieval",
      [](const retrieve::Results& results, const retrieve::Gold& gold) {
        const auto e = retrieve::evaluate_retrieval(results, gold);
        py::dict out;
        out["precision"] = e.precision;
        out["recall"] = e.recall;
        out["f1"] = e.f1;
        return out;
      },
      py::arg("results"), py::arg("gold"));

  // webfilter
  m.def(
      "topic_relevance",
      [](const std::string& document, const std::string& topics, const std::array<double, 4>& weights) {
        webfilter::LocationWeights lw;
        lw.w = weights;
        return webfilter::topic_relevance(webfilter::parse_located_document("doc", document),
                                          webfilter::parse_topics(topics), lw);
      },
      py::arg("document"), py::arg("topics"), py::arg("weights") = std::array<double, 4>{10, 4, 2, 1},
      "Document in the #title/#headings/#metadata/#body format; topics as term<TAB>weight lines");
  m.def(
      "ppl1",
      [](const lm::NGramModel& model, const std::string& sentence) {
        return webfilter::ppl1(model, corpus::sentence_from_text(sentence));
      },
      py::arg("model"), py::arg("sentence"));

  // metrics
  m.def(
      "bleu",
      [](const Lines& hyps, const Lines& refs, int max_n, bool smooth) {
        const auto r = metrics::bleu(to_tokens(hyps), to_tokens(refs), {max_n, smooth});
        py::dict out;
        out["score"] = r.score;
        out["precisions"] = r.precisions;
        out["brevity_penalty"] = r.brevity_penalty;
        out["hypothesis_length"] = r.hypothesis_length;
        out["reference_length"] = r.reference_length;
        return out;
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("max_n") = 4, py::arg("smooth") = false);
  m.def(
      "vocab_stats",
      [](const Lines& lines) {
        const auto v = metrics::vocab_stats(to_corpus(lines));
        return py::make_tuple(v.tokens, v.types, v.ratio);
      },
      py::arg("sentences"), "(tokens, types, type/token ratio)");
  m.def(
      "oov_ratio", [](const Lines& train, const Lines& test) { return metrics::oov_ratio(to_corpus(train), to_corpus(test)); },
      py::arg("train"), py::arg("test"));
  m.def(
      "overlap_stats",
      [](const std::vector<std::set<std::size_t>>& subsets) {
        const auto o = metrics::overlap_stats(subsets);
        return py::make_tuple(o.overlap, o.unique);
      },
      py::arg("subsets"), "(overlap, per-subset unique share)");

  // cli
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a domsel subcommand; returns (exit code, help text, error stream)");
}
