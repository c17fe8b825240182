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

#include "domsel/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "domsel/combine.hpp"
#include "domsel/corpus.hpp"
#include "domsel/error.hpp"
#include "domsel/lm.hpp"
#include "domsel/metrics.hpp"
#include "domsel/retrieve.hpp"
#include "domsel/select.hpp"
#include "domsel/util.hpp"
#include "domsel/webfilter.hpp"

#ifndef DOMSEL_VERSION
#define DOMSEL_VERSION "unknown"
#endif

namespace domsel::cli {

namespace fs = std::filesystem;
using corpus::Corpus;
using corpus::ParallelCorpus;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw DataError("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string digest_path(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) return sha256_hex(read_bytes(path));
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += fs::relative(f, path).generic_string() + '\t' + sha256_hex(read_bytes(f)) + '\n';
  }
  return sha256_hex(listing);
}

namespace {

struct Env {
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::ostream* err = nullptr;

  void log(const std::string& message) const { *err << message << '\n'; }
};

struct InputOption {
  CLI::Option* option;
  bool named;  // values are NAME=PATH
};

struct Command {
  CLI::App* app = nullptr;
  std::string name;
  std::string output;
  std::vector<InputOption> inputs;
  std::function<void()> validate;
  std::function<std::string(const Env&)> body;
};

using Commands = std::vector<std::unique_ptr<Command>>;

Command& add_command(CLI::App& parent, Commands& cmds, const std::string& name, const std::string& description,
                     const std::string& full_name = {}) {
  auto cmd = std::make_unique<Command>();
  cmd->app = parent.add_subcommand(name, description);
  cmd->app->fallthrough();
  cmd->name = full_name.empty() ? name : full_name;
  cmd->app->add_option("-o,--output", cmd->output, "Output file; the manifest is written to <output>.manifest")
      ->required();
  cmds.push_back(std::move(cmd));
  return *cmds.back();
}

CLI::Option* input(Command& c, CLI::Option* opt, bool named = false) {
  c.inputs.push_back({opt, named});
  return opt;
}

void require_flags(const CLI::App& app, const std::vector<std::string>& flags, const std::string& context) {
  std::string missing;
  for (const auto& f : flags) {
    if (app.count(f) == 0) missing += (missing.empty() ? "" : ", ") + f;
  }
  if (!missing.empty()) throw ParameterError(missing + " required " + context);
}

std::string line(const std::string& key, const std::string& value) { return key + "\t" + value + "\n"; }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::pair<std::string, std::string> split_named(const std::string& value) {
  const auto eq = value.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == value.size()) {
    throw ParameterError("expected NAME=PATH, got '" + value + "'");
  }
  return {value.substr(0, eq), value.substr(eq + 1)};
}

// Corpus loading shared by the subcommands.

struct CorpusFormat {
  std::string format = "plain";
  bool factored = false;

  bool is_factored() const { return factored || format == "factored"; }
};

void add_format_options(CLI::App* app, CorpusFormat& f) {
  app->add_option("--format", f.format, "Corpus format: plain|factored|tsv|two-file")
      ->check(CLI::IsMember({"plain", "factored", "tsv", "two-file"}));
  app->add_flag("--factored", f.factored, "Parallel tokens carry |-separated factors");
}

using AnyCorpus = std::variant<Corpus, ParallelCorpus>;

AnyCorpus load_any(const std::string& path, const std::string& target, const CorpusFormat& f) {
  if (f.format == "tsv") return corpus::load_parallel_tsv(path, f.is_factored());
  if (f.format == "two-file") {
    if (target.empty()) throw ParameterError("--target required for --format two-file");
    return corpus::load_parallel(path, target, f.is_factored());
  }
  return corpus::load_monolingual(path, f.is_factored());
}

Corpus monolingual(AnyCorpus c) {
  if (auto* pc = std::get_if<ParallelCorpus>(&c)) return pc->source_side();
  return std::get<Corpus>(std::move(c));
}

std::string write_any(const AnyCorpus& c, bool factored) {
  if (const auto* pc = std::get_if<ParallelCorpus>(&c)) return corpus::format_parallel_tsv(*pc, factored);
  return corpus::format_corpus(std::get<Corpus>(c), factored);
}

template <typename F>
void map_sentences(AnyCorpus& c, F f) {
  if (auto* pc = std::get_if<ParallelCorpus>(&c)) {
    for (auto& p : pc->pairs) {
      p.source = f(p.source);
      p.target = f(p.target);
    }
  } else {
    for (auto& s : std::get<Corpus>(c).sentences) s = f(s);
  }
}

std::optional<corpus::FactorView> parse_view(const std::string& name) {
  if (name.empty()) return std::nullopt;
  return corpus::parse_factor_view(name);
}

const auto kViews = CLI::IsMember({"f", "fn", "l", "ln", "t", "tn"});

std::shared_ptr<const lm::NGramModel> load_model(const std::string& path) {
  return std::make_shared<const lm::NGramModel>(lm::load_arpa(path));
}

// Subcommands.

void add_preprocess(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string input, target, lexicon, view;
    CorpusFormat fmt;
    bool dedup = false, numbers = false, apostrophes = false;
    std::size_t max_len = 0, sample = 0;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "preprocess", "Normalize, deduplicate, length-filter, project or sample a corpus");
  input(c, c.app->add_option("-i,--input", o->input, "Corpus (source side for two-file)")->required());
  input(c, c.app->add_option("--target", o->target, "Target side for --format two-file"));
  add_format_options(c.app, o->fmt);
  c.app->add_flag("--dedup", o->dedup, "Drop repeated sentences or pairs, keeping the first");
  c.app->add_option("--max-len", o->max_len, "Drop sentences or pairs with a side longer than this; 0 keeps all");
  c.app->add_flag("--numbers", o->numbers, "Replace digit runs with the number placeholder");
  c.app->add_flag("--apostrophes", o->apostrophes, "Map typographic apostrophes to ASCII");
  input(c, c.app->add_option("--hyphen-lexicon", o->lexicon, "Emit alternative-translation markup using this lexicon"));
  c.app->add_option("--view", o->view, "Project onto a factor view: f|fn|l|ln|t|tn")->check(kViews);
  c.app->add_option("--sample", o->sample, "Keep a seeded random subset of this many entries; 0 keeps all");
  c.body = [o](const Env& env) {
    auto data = load_any(o->input, o->target, o->fmt);
    if (o->apostrophes) map_sentences(data, [](const corpus::Sentence& s) { return corpus::normalize_apostrophes(s); });
    if (o->numbers) map_sentences(data, [](const corpus::Sentence& s) { return corpus::normalize_numbers(s); });
    std::visit(
        [&](auto& c) {
          if (o->dedup) c = corpus::dedup(c);
          if (o->max_len > 0) c = corpus::length_filter(c, o->max_len);
        },
        data);
    bool factored = o->fmt.is_factored();
    if (const auto view = parse_view(o->view)) {
      std::visit([&](auto& c) { c = corpus::factor_view(c, *view); }, data);
      factored = false;
    }
    if (o->sample > 0) {
      if (auto* pc = std::get_if<ParallelCorpus>(&data)) {
        Rng rng(env.seed);
        ParallelCorpus out{pc->id, {}};
        for (std::size_t i : sample_indices(pc->size(), std::min(o->sample, pc->size()), rng)) {
          out.pairs.push_back(pc->pairs[i]);
        }
        data = std::move(out);
      } else {
        data = select::sample_subset(std::get<Corpus>(data), o->sample, env.seed);
      }
    }
    if (o->lexicon.empty()) return write_any(data, factored);
    const auto* mono = std::get_if<Corpus>(&data);
    if (!mono) throw ParameterError("--hyphen-lexicon needs a monolingual corpus");
    const auto lexicon = corpus::Lexicon::load(o->lexicon);
    std::string out;
    for (const auto& s : mono->sentences) out += corpus::hyphen_alt_markup(s, lexicon) + "\n";
    return out;
  };
}

void add_train_lm(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string input, vocab_from, smoothing = "mkn";
    CorpusFormat fmt;
    int order = 4;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "train-lm", "Train a smoothed n-gram model and write it in ARPA format");
  input(c, c.app->add_option("-i,--input", o->input, "Training corpus")->required());
  add_format_options(c.app, o->fmt);
  c.app->add_option("--order", o->order, "n-gram order");
  c.app->add_option("--smoothing", o->smoothing, "mle|wb|mkn");
  input(c, c.app->add_option("--vocab-from", o->vocab_from, "Restrict the vocabulary to this corpus's types"));
  c.validate = [o] { (void)lm::parse_smoothing(o->smoothing); };
  c.body = [o](const Env&) {
    lm::TrainOptions t;
    t.order = o->order;
    t.smoothing = lm::parse_smoothing(o->smoothing);
    if (!o->vocab_from.empty()) {
      t.vocabulary = lm::Vocabulary::from_corpus(monolingual(load_any(o->vocab_from, "", o->fmt)));
    }
    return lm::write_arpa(lm::train(monolingual(load_any(o->input, "", o->fmt)), t));
  };
}

void add_perplexity(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string lm, input;
    CorpusFormat fmt;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "perplexity", "Cross-entropy and perplexity of a corpus under a model");
  input(c, c.app->add_option("--lm", o->lm, "ARPA model")->required());
  input(c, c.app->add_option("-i,--input", o->input, "Test corpus")->required());
  add_format_options(c.app, o->fmt);
  c.body = [o](const Env& env) {
    const auto model = lm::load_arpa(o->lm);
    const auto test = monolingual(load_any(o->input, "", o->fmt));
    const auto s = lm::evaluate(model, test, env.threads);
    return line("sentences", std::to_string(test.size())) + line("words", std::to_string(s.words)) +
           line("events", std::to_string(s.events)) + line("log2_prob", format_double(s.log2_prob)) +
           line("cross_entropy", format_double(s.cross_entropy())) + line("perplexity", format_double(s.perplexity()));
  };
}

void add_score(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string criterion, general, reference, in_lm, out_lm, in_lm_target, out_lm_target, view;
    std::string reference_mode = "online";
    CorpusFormat fmt;
    bool fms_fast = false;
    double fms_cutoff = 0.0;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "score", "Score every general-corpus sentence with a selection criterion");
  auto* cmd = c.app;
  c.app->add_option("--criterion", o->criterion, "cosine|ce|ml|mml|fms")->required();
  input(c, c.app->add_option("--general", o->general, "General-domain corpus to score")->required());
  input(c, c.app->add_option("--reference", o->reference, "In-domain reference corpus (cosine, fms)"));
  input(c, c.app->add_option("--in-lm", o->in_lm, "In-domain ARPA model (ce, ml, mml source side)"));
  input(c, c.app->add_option("--out-lm", o->out_lm, "General-domain ARPA model (ml, mml source side)"));
  input(c, c.app->add_option("--in-lm-target", o->in_lm_target, "In-domain target-side model (mml)"));
  input(c, c.app->add_option("--out-lm-target", o->out_lm_target, "General-domain target-side model (mml)"));
  add_format_options(c.app, o->fmt);
  c.app->add_option("--view", o->view, "Score a factor-view projection: f|fn|l|ln|t|tn")->check(kViews);
  c.app->add_option("--reference-mode", o->reference_mode, "online (separate in-domain corpus) or offline (test set)")
      ->check(CLI::IsMember({"online", "offline"}));
  c.app->add_flag("--fms-fast", o->fms_fast, "Skip the edit-distance DP for pairs below the length bound");
  c.app->add_option("--fms-cutoff", o->fms_cutoff, "Length-bound cutoff for --fms-fast");
  c.validate = [o, cmd] {
    const auto crit = select::parse_criterion(o->criterion);
    const std::string context = "for criterion " + o->criterion;
    switch (crit) {
      case select::Criterion::cosine:
      case select::Criterion::fms: require_flags(*cmd, {"--reference"}, context); break;
      case select::Criterion::cross_entropy: require_flags(*cmd, {"--in-lm"}, context); break;
      case select::Criterion::moore_lewis: require_flags(*cmd, {"--in-lm", "--out-lm"}, context); break;
      case select::Criterion::bilingual_moore_lewis:
        require_flags(*cmd, {"--in-lm", "--out-lm", "--in-lm-target", "--out-lm-target"}, context);
        break;
    }
    if (o->fms_fast && crit != select::Criterion::fms) throw ParameterError("--fms-fast applies to criterion fms only");
  };
  c.body = [o](const Env& env) {
    const auto crit = select::parse_criterion(o->criterion);
    const auto view = parse_view(o->view);
    select::CriterionScores result;
    result.criterion = std::string(select::to_string(crit));
    result.direction = select::direction_of(crit);
    auto& p = result.provenance;
    p["reference_mode"] = o->reference_mode;
    if (view) p["factor_view"] = std::string(corpus::to_string(*view));
    const auto note_lm = [&p](const lm::NGramModel& m) {
      p["lm_order"] = std::to_string(m.order());
      p["lm_smoothing"] = std::string(lm::to_string(m.smoothing()));
      p["ce_normalization"] = "per-event (words + end-of-sentence)";
    };
    auto general = load_any(o->general, "", o->fmt);
    if (crit == select::Criterion::bilingual_moore_lewis) {
      auto* pc = std::get_if<ParallelCorpus>(&general);
      if (!pc) throw ParameterError("criterion mml needs a parallel --general (--format tsv)");
      const ParallelCorpus g = view ? corpus::factor_view(*pc, *view) : *pc;
      const auto in_s = load_model(o->in_lm), out_s = load_model(o->out_lm);
      const auto in_t = load_model(o->in_lm_target), out_t = load_model(o->out_lm_target);
      note_lm(*in_s);
      result.scores = select::score_bilingual_ml(g, *in_s, *out_s, *in_t, *out_t, env.threads);
      return select::format_scores(result);
    }
    Corpus g = monolingual(std::move(general));
    if (view) g = corpus::factor_view(g, *view);
    const auto reference = [&] {
      Corpus r = monolingual(load_any(o->reference, "", o->fmt));
      return view ? corpus::factor_view(r, *view) : r;
    };
    switch (crit) {
      case select::Criterion::cosine: result.scores = select::score_cosine(g, reference(), env.threads); break;
      case select::Criterion::fms: {
        select::FmsOptions fo{o->fms_fast, o->fms_cutoff, env.threads};
        p["fms_mode"] = fo.fast ? "fast" : "exact";
        if (fo.fast) p["fms_cutoff"] = format_double(fo.cutoff);
        result.scores = select::score_fms(g, reference(), fo);
        break;
      }
      case select::Criterion::cross_entropy: {
        const auto in = load_model(o->in_lm);
        note_lm(*in);
        result.scores = select::score_cross_entropy(g, *in, env.threads);
        break;
      }
      default: {
        const auto in = load_model(o->in_lm), out = load_model(o->out_lm);
        note_lm(*in);
        result.scores = select::score_moore_lewis(g, *in, *out, env.threads);
        break;
      }
    }
    return select::format_scores(result);
  };
}

void add_select(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string scores;
    double k = 100.0, theta = 0.0;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "select", "Rank a score file and keep the top K% or the sentences beating theta");
  auto* cmd = c.app;
  input(c, c.app->add_option("--scores", o->scores, "Score file written by 'score'")->required());
  auto* k = c.app->add_option("--k", o->k, "Percentage of the corpus to keep, in (0, 100]");
  c.app->add_option("--theta", o->theta, "Keep sentences strictly better than this score")->excludes(k);
  c.validate = [cmd] {
    if (cmd->count("--k") == 0 && cmd->count("--theta") == 0) throw ParameterError("--k or --theta required");
  };
  c.body = [o, cmd](const Env&) {
    const auto scores = select::load_scores(o->scores);
    return select::format_selection(cmd->count("--k") ? select::select_top(scores, o->k)
                                                      : select::threshold_filter(scores, o->theta));
  };
}

std::vector<select::SelectionResult> load_selections(const std::vector<std::string>& paths) {
  std::vector<select::SelectionResult> out;
  for (const auto& p : paths) out.push_back(select::load_selection(p));
  return out;
}

std::vector<double> weights_or_ones(const std::vector<double>& weights, std::size_t n) {
  return weights.empty() ? std::vector<double>(n, 1.0) : weights;
}

void add_combine(CLI::App& app, Commands& cmds) {
  auto* combine = app.add_subcommand("combine", "Combine selections, phrase tables or language models");
  combine->fallthrough();
  combine->require_subcommand(1);

  {
    struct Opts {
      std::vector<std::string> selections;
      std::vector<double> weights;
      std::string corpus;
      CorpusFormat fmt;
      bool replicate = false;
    };
    auto o = std::make_shared<Opts>();
    auto& c = add_command(*combine, cmds, "corpus", "Weighted union of selections over one corpus", "combine corpus");
    input(c, c.app->add_option("--selection", o->selections, "Selection file (repeat)")->required());
    c.app->add_option("--weight", o->weights, "Weight per selection, in order (default 1 each)");
    input(c, c.app->add_option("--corpus", o->corpus, "Corpus the selections index")->required());
    add_format_options(c.app, o->fmt);
    c.app->add_flag("--replicate", o->replicate, "Write a corpus with each entry repeated round(weight) times");
    c.body = [o](const Env&) {
      const auto wc = combine::combine_corpus_weighted(load_selections(o->selections),
                                                       weights_or_ones(o->weights, o->selections.size()));
      const auto data = load_any(o->corpus, "", o->fmt);
      return std::visit(
          [&](const auto& src) {
            if (!o->replicate) return combine::format_weighted(wc, src);
            return write_any(AnyCorpus(combine::replicate(wc, src)), o->fmt.is_factored());
          },
          data);
    };
  }
  {
    struct Opts {
      std::vector<std::string> selections;
      std::size_t size = 0;
    };
    auto o = std::make_shared<Opts>();
    auto& c = add_command(*combine, cmds, "naive-rank", "Round-robin merge of ranked selections", "combine naive-rank");
    input(c, c.app->add_option("--selection", o->selections, "Selection file (repeat)")->required());
    c.app->add_option("--size", o->size, "Number of distinct sentences to keep")->required();
    c.body = [o](const Env&) {
      const auto sels = load_selections(o->selections);
      std::vector<std::vector<std::size_t>> lists;
      std::vector<std::string> sources;
      for (const auto& s : sels) {
        lists.push_back(s.ranked);
        sources.push_back(s.criterion);
      }
      select::SelectionResult r;
      r.ranked = combine::combine_naive_rank(lists, o->size);
      r.criterion = "naive-rank";
      r.provenance["sources"] = join(sources, ",");
      r.provenance["size"] = std::to_string(o->size);
      return select::format_selection(r);
    };
  }
  {
    struct Opts {
      std::vector<std::string> tables;
      std::vector<double> weights;
    };
    auto o = std::make_shared<Opts>();
    auto& c = add_command(*combine, cmds, "tables", "Linear interpolation of phrase tables", "combine tables");
    input(c, c.app->add_option("--table", o->tables, "Phrase table (repeat)")->required());
    c.app->add_option("--weight", o->weights, "Weight per table, in order (default uniform)");
    c.body = [o](const Env&) {
      std::vector<combine::ProbTable> tables;
      for (const auto& t : o->tables) tables.push_back(combine::load_prob_table(t));
      return combine::format_prob_table(
          combine::interpolate_tables(tables, weights_or_ones(o->weights, tables.size())));
    };
  }
  {
    struct Opts {
      std::vector<std::string> lms;
      std::string dev;
      CorpusFormat fmt;
      lm::InterpolationOptions em;
    };
    auto o = std::make_shared<Opts>();
    auto& c = add_command(*combine, cmds, "lm-interp", "Fit mixture weights of language models on a dev corpus",
                          "combine lm-interp");
    input(c, c.app->add_option("--lm", o->lms, "ARPA model (repeat)")->required());
    input(c, c.app->add_option("--dev", o->dev, "Development corpus")->required());
    add_format_options(c.app, o->fmt);
    c.app->add_option("--max-iterations", o->em.max_iterations, "EM iteration limit");
    c.app->add_option("--tolerance", o->em.tolerance, "Relative log-likelihood change that stops EM");
    c.body = [o](const Env& env) {
      std::vector<std::shared_ptr<const lm::LanguageModel>> models;
      for (const auto& p : o->lms) models.push_back(load_model(p));
      const auto dev = monolingual(load_any(o->dev, "", o->fmt));
      lm::InterpolationTrace trace;
      const auto mix = lm::interpolate(models, dev, o->em, &trace);
      std::string out;
      for (std::size_t i = 0; i < mix.size(); ++i) out += line("weight." + std::to_string(i), format_double(mix.weights()[i]));
      out += line("iterations", std::to_string(trace.iterations));
      out += line("converged", trace.converged ? "true" : "false");
      for (std::size_t i = 0; i < trace.log_likelihood.size(); ++i) {
        out += line("log_likelihood." + std::to_string(i), format_double(trace.log_likelihood[i]));
      }
      out += line("dev_perplexity", format_double(lm::perplexity(mix, dev, env.threads)));
      return out;
    };
  }
}

void add_retrieve(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string sources, targets, stopwords, gold;
    retrieve::RetrieveOptions ro;
    retrieve::LengthFilterParams lf;
    bool length_filter = false;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "retrieve", "Find the comparable target document for each source document");
  input(c, c.app->add_option("--sources", o->sources, "Source collection (directory or id<TAB>text file)")->required());
  input(c, c.app->add_option("--targets", o->targets, "Target collection")->required());
  c.app->add_option("--lambda", o->ro.lambda, "Query size as a fraction of the source length, in (0, 1]");
  c.app->add_option("--n-best", o->ro.n_best, "Candidates per source");
  c.app->add_flag("--length-filter", o->length_filter, "Only consider targets inside the length window");
  c.app->add_option("--delta", o->lf.delta, "Mean relative length deviation for the window");
  c.app->add_option("--multiplier", o->lf.multiplier, "Window half-width in units of delta");
  input(c, c.app->add_option("--stopwords", o->stopwords, "Stopword list, one per line"));
  input(c, c.app->add_option("--gold", o->gold, "Gold source<TAB>target pairs; P/R/F1 is logged"));
  c.body = [o](const Env& env) {
    const auto sources = retrieve::load_collection(o->sources);
    const retrieve::DocumentIndex index(retrieve::load_collection(o->targets));
    auto ro = o->ro;
    if (o->length_filter) ro.length_filter = o->lf;
    const auto stop = o->stopwords.empty() ? retrieve::Stopwords{} : retrieve::load_stopwords(o->stopwords);
    const auto hits = retrieve::retrieve_all(sources, index, ro, stop, env.threads);
    if (!o->gold.empty()) {
      retrieve::Results results;
      for (std::size_t i = 0; i < sources.size(); ++i) {
        auto& ids = results[sources[i].id];
        for (const auto& h : hits[i]) ids.push_back(h.id);
      }
      const auto e = retrieve::evaluate_retrieval(results, retrieve::load_gold(o->gold));
      env.log("retrieve: precision " + format_double(e.precision) + " recall " + format_double(e.recall) + " f1 " +
              format_double(e.f1));
    }
    return retrieve::format_results(sources, hits);
  };
}

void add_estimate_delta(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string input, target;
    CorpusFormat fmt{"tsv", false};
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "estimate-delta", "Mean relative source/target length deviation of a parallel corpus");
  input(c, c.app->add_option("-i,--input", o->input, "Parallel corpus")->required());
  input(c, c.app->add_option("--target", o->target, "Target side for --format two-file"));
  add_format_options(c.app, o->fmt);
  c.body = [o](const Env&) {
    const auto data = load_any(o->input, o->target, o->fmt);
    const auto* pc = std::get_if<ParallelCorpus>(&data);
    if (!pc) throw ParameterError("estimate-delta needs a parallel corpus (--format tsv or two-file)");
    return line("delta", format_double(retrieve::estimate_delta(*pc))) + line("pairs", std::to_string(pc->size()));
  };
}

struct TopicOpts {
  std::string docs, topics;
  double k = 100.0;
  std::vector<double> weights{10.0, 4.0, 2.0, 1.0};

  webfilter::LocationWeights location_weights() const {
    webfilter::LocationWeights lw;
    std::copy(weights.begin(), weights.end(), lw.w.begin());
    return lw;
  }
};

void add_topic_options(Command& c, TopicOpts& o, bool topics_required) {
  input(c, c.app->add_option("--docs", o.docs, "Located documents (directory or #doc file)")->required());
  auto* t = input(c, c.app->add_option("--topics", o.topics, "Topic definition TSV"));
  if (topics_required) t->required();
  c.app->add_option("--k", o.k, "Percentage of documents to keep by topic relevance");
  c.app->add_option("--weights", o.weights, "Location weights title,headings,metadata,body")
      ->expected(4)
      ->delimiter(',');
}

void add_topic_filter(CLI::App& app, Commands& cmds) {
  auto o = std::make_shared<TopicOpts>();
  auto& c = add_command(app, cmds, "topic-filter", "Keep the top K% of documents by topic relevance");
  add_topic_options(c, *o, true);
  c.body = [o](const Env& env) {
    const auto docs = webfilter::load_located_collection(o->docs);
    const auto scores = webfilter::topic_relevance(docs, webfilter::load_topics(o->topics), o->location_weights(),
                                                   env.threads);
    std::string out;
    for (std::size_t i : webfilter::filter_documents_topk(docs, scores, o->k)) {
      out += docs[i].id + "\t" + format_double(scores[i]) + "\n";
    }
    return out;
  };
}

void add_ppl_filter(CLI::App& app, Commands& cmds) {
  struct Opts : TopicOpts {
    std::string lm;
    double n = 100.0;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "ppl-filter",
                        "Keep the N% of body sentences with the lowest ppl1, optionally after a topic filter");
  auto* cmd = c.app;
  add_topic_options(c, *o, false);
  input(c, c.app->add_option("--lm", o->lm, "In-domain ARPA model")->required());
  c.app->add_option("--n", o->n, "Percentage of sentences to keep");
  c.validate = [cmd] {
    if (cmd->count("--topics") == 0 && (cmd->count("--k") || cmd->count("--weights"))) {
      throw ParameterError("--k and --weights need --topics");
    }
  };
  c.body = [o](const Env& env) {
    const auto docs = webfilter::load_located_collection(o->docs);
    const auto model = lm::load_arpa(o->lm);
    std::vector<webfilter::FilteredSentence> kept;
    if (!o->topics.empty()) {
      kept = webfilter::combined_filter(docs, webfilter::load_topics(o->topics), o->location_weights(), o->k, o->n,
                                        model, env.threads);
    } else {
      std::vector<const webfilter::LocatedDocument*> all;
      for (const auto& d : docs) all.push_back(&d);
      kept = webfilter::rank_sentences_by_ppl1(all, model, o->n, env.threads);
    }
    std::string out;
    for (const auto& s : kept) {
      out += s.doc_id + "\t" + std::to_string(s.line) + "\t" + format_double(s.ppl1) + "\t" + s.sentence.text() + "\n";
    }
    return out;
  };
}

void add_diagnose(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::vector<std::string> subsets, selections;
    std::string source, test, layout = "tsv";
    CorpusFormat fmt;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "diagnose", "Vocabulary, OOV and overlap statistics of subcorpora");
  auto* cmd = c.app;
  input(c, c.app->add_option("--subset", o->subsets, "NAME=CORPUS (repeat)"), true);
  input(c, c.app->add_option("--selection", o->selections, "NAME=SELECTION over --source (repeat)"), true);
  input(c, c.app->add_option("--source", o->source, "Corpus the selections index"));
  input(c, c.app->add_option("--test", o->test, "Test corpus for OOV rows"));
  add_format_options(c.app, o->fmt);
  c.app->add_option("--layout", o->layout, "tsv|aligned")->check(CLI::IsMember({"tsv", "aligned"}));
  c.validate = [o, cmd] {
    if (o->subsets.empty() && o->selections.empty()) throw ParameterError("--subset or --selection required");
    if (!o->selections.empty()) require_flags(*cmd, {"--source"}, "with --selection");
    for (const auto& v : o->subsets) split_named(v);
    for (const auto& v : o->selections) split_named(v);
  };
  c.body = [o](const Env&) {
    std::vector<metrics::NamedSubset> subsets;
    for (const auto& v : o->subsets) {
      const auto [name, path] = split_named(v);
      subsets.push_back({name, monolingual(load_any(path, "", o->fmt)), std::nullopt});
    }
    if (!o->selections.empty()) {
      const auto source = monolingual(load_any(o->source, "", o->fmt));
      for (const auto& v : o->selections) {
        const auto [name, path] = split_named(v);
        const auto sel = select::load_selection(path);
        metrics::NamedSubset s{name, {name, {}}, std::set<std::size_t>{}};
        for (std::size_t i : sel.ranked) {
          if (i >= source.size()) throw DataError(path + ": index " + std::to_string(i) + " outside --source");
          s.corpus.sentences.push_back(source.sentences[i]);
          s.indices->insert(i);
        }
        subsets.push_back(std::move(s));
      }
    }
    std::optional<Corpus> test;
    if (!o->test.empty()) test = monolingual(load_any(o->test, "", o->fmt));
    const auto table = metrics::diagnostics_table(subsets, test ? &*test : nullptr);
    return o->layout == "aligned" ? metrics::format_aligned(table) : metrics::format_tsv(table);
  };
}

void add_bleu(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string hyp, ref;
    metrics::BleuOptions bo;
  };
  auto o = std::make_shared<Opts>();
  auto& c = add_command(app, cmds, "bleu", "Single-reference corpus BLEU");
  input(c, c.app->add_option("--hyp", o->hyp, "Hypotheses, one per line")->required());
  input(c, c.app->add_option("--ref", o->ref, "References, one per line")->required());
  c.app->add_option("--max-n", o->bo.max_n, "Highest n-gram order");
  c.app->add_flag("--smooth", o->bo.smooth, "Add-one smoothing above unigrams");
  c.body = [o](const Env&) {
    const auto r = metrics::bleu(metrics::load_token_lines(o->hyp), metrics::load_token_lines(o->ref), o->bo);
    std::string out = line("bleu", format_double(r.score));
    for (std::size_t n = 0; n < r.precisions.size(); ++n) {
      out += line("precision." + std::to_string(n + 1), format_double(r.precisions[n]));
    }
    out += line("brevity_penalty", format_double(r.brevity_penalty));
    out += line("hypothesis_length", std::to_string(r.hypothesis_length));
    out += line("reference_length", std::to_string(r.reference_length));
    return out;
  };
}

// Appends `--key=value` for every config entry whose flag is absent from args.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto present = [&](const std::string& key) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  auto merged = args;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = trim(lines[i]);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos || trim(t.substr(0, eq)).empty()) {
      throw ParameterError(path + ":" + std::to_string(i + 1) + ": expected key=value");
    }
    const std::string key(trim(t.substr(0, eq)));
    if (key == "config" || present(key)) continue;
    merged.push_back("--" + key + "=" + std::string(trim(t.substr(eq + 1))));
  }
  return merged;
}

std::string option_value(const CLI::Option& opt) {
  if (opt.get_expected_max() == 0) return opt.count() && opt.as<bool>() ? "true" : "false";
  if (opt.count()) return join(opt.results(), ",");
  return opt.get_default_str();
}

std::string manifest_text(const Command& cmd, const Env& env, double seconds) {
  std::map<std::string, std::string> params, inputs;
  for (const CLI::Option* opt : cmd.app->get_options()) {
    const auto& name = opt->get_single_name();
    if (name == "help") continue;
    const auto value = option_value(*opt);
    if (!value.empty() && value != "[]") params[name] = value;
  }
  for (const auto& in : cmd.inputs) {
    const auto values = in.option->results();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string path = in.named ? split_named(values[i]).second : values[i];
      const std::string key = in.option->get_single_name() + (values.size() > 1 ? "." + std::to_string(i) : "");
      inputs[key] = path + "\tsha256:" + digest_path(path);
    }
  }
  std::string out = "subcommand=" + cmd.name + "\n";
  out += "version=" DOMSEL_VERSION "\n";
  out += "seed=" + std::to_string(env.seed) + "\n";
  for (const auto& [k, v] : params) out += "param." + k + "=" + v + "\n";
  for (const auto& [k, v] : inputs) out += "input." + k + "=" + v + "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  out += std::string("duration_seconds=") + buf + "\n";
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  set_log_sink([&err](std::string_view m) { err << "warning: " << m << '\n'; });
  struct RestoreLog {
    ~RestoreLog() { reset_log_sink(); }
  } restore;

  CLI::App app{"Domain-relevant training data selection, combination, retrieval and diagnostics", "domsel"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Env env;
  env.err = &err;
  std::string config;
  app.add_option("--threads", env.threads, "Worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--seed", env.seed, "Seed of the run's random generator");
  app.add_option("--config", config, "key=value defaults; command-line flags win");

  Commands cmds;
  add_preprocess(app, cmds);
  add_train_lm(app, cmds);
  add_perplexity(app, cmds);
  add_score(app, cmds);
  add_select(app, cmds);
  add_combine(app, cmds);
  add_retrieve(app, cmds);
  add_estimate_delta(app, cmds);
  add_topic_filter(app, cmds);
  add_ppl_filter(app, cmds);
  add_diagnose(app, cmds);
  add_bleu(app, cmds);

  if (!args.empty() && args.front().rfind("-", 0) != 0 && !app.get_subcommand_no_throw(args.front())) {
    err << "error: unknown subcommand '" << args.front() << "'\nrun 'domsel --help' for usage\n";
    return kExitUsageError;
  }
  try {
    auto argv = merge_config(args);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\nrun 'domsel --help' for usage\n";
    return kExitUsageError;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }

  const Command* cmd = nullptr;
  for (const auto& c : cmds) {
    if (c->app->parsed()) cmd = c.get();
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cmd->validate) cmd->validate();
    const std::string body = cmd->body(env);
    const fs::path output = cmd->output;
    const fs::path manifest = output.string() + ".manifest";
    write_text_file(output, std::string(kManifestHeader) + manifest.filename().string() + "\n" + body);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    write_text_file(manifest, manifest_text(*cmd, env, elapsed.count()));
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace domsel::cli
