#pragma once

// Seeded two-domain benchmark: each domain draws content words from its own
// Zipf-distributed vocabulary or from a Zipf vocabulary common to both, and
// shares a small set of function words.
// Targets are word-by-word "translations" (a fixed prefix per side).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "domsel/corpus.hpp"
#include "domsel/util.hpp"

namespace domsel::test {

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) {
    double total = 0.0;
    for (std::size_t r = 1; r <= n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r), exponent);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }
  std::size_t operator()(Rng& rng) const {
    const double u = rng.unit();
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cdf_;
};

struct DomainSpec {
  std::string prefix;        // content-word prefix, e.g. "med"
  std::size_t vocab = 300;
  double exponent = 1.0;
  double function_share = 0.3;
  double common_share = 0.3;  // of the content words
  std::size_t min_len = 5;
  std::size_t max_len = 20;
};

inline const std::vector<std::string>& function_words() {
  static const std::vector<std::string> words{"the", "of",   "and", "to",   "in",  "a",    "is",
                                              "that", "for", "it",  "with", "as",  "was",  "on",
                                              "be",  "by",   "this", "are", "from", "at"};
  return words;
}

inline const ZipfSampler& common_zipf() {
  static const ZipfSampler z(500, 1.0);
  return z;
}

inline std::vector<std::string> domain_sentence(const DomainSpec& spec, const ZipfSampler& zipf, Rng& rng) {
  const std::size_t len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < len; ++i) {
    if (rng.unit() < spec.function_share) {
      words.push_back(function_words()[rng.below(function_words().size())]);
    } else if (rng.unit() < spec.common_share) {
      words.push_back("w" + std::to_string(common_zipf()(rng)));
    } else {
      words.push_back(spec.prefix + std::to_string(zipf(rng)));
    }
  }
  return words;
}

inline corpus::Sentence translate(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  for (const auto& w : words) out.push_back("t_" + w);
  return corpus::sentence_from_words(out);
}

struct TwoDomainBenchmark {
  corpus::ParallelCorpus reference;    // in-domain
  corpus::ParallelCorpus general;      // 50/50 mix, shuffled
  std::vector<bool> in_domain;         // label per general pair
};

inline TwoDomainBenchmark make_two_domain(std::size_t reference_size, std::size_t general_size, std::uint64_t seed,
                                          const DomainSpec& in = {"med"}, const DomainSpec& out = {"gen"}) {
  Rng rng(seed);
  const ZipfSampler zin(in.vocab, in.exponent), zout(out.vocab, out.exponent);
  TwoDomainBenchmark b;
  const auto pair = [&](bool is_in) {
    const auto w = is_in ? domain_sentence(in, zin, rng) : domain_sentence(out, zout, rng);
    return corpus::SentencePair{corpus::sentence_from_words(w), translate(w)};
  };
  for (std::size_t i = 0; i < reference_size; ++i) b.reference.pairs.push_back(pair(true));
  std::vector<bool> labels(general_size);
  for (std::size_t i = 0; i < general_size; ++i) labels[i] = i < general_size / 2;
  // Fisher-Yates with the portable generator.
  for (std::size_t i = general_size; i > 1; --i) {
    const std::size_t j = rng.below(i);
    const bool tmp = labels[i - 1];
    labels[i - 1] = labels[j];
    labels[j] = tmp;
  }
  for (bool is_in : labels) {
    b.general.pairs.push_back(pair(is_in));
    b.in_domain.push_back(is_in);
  }
  return b;
}

// Probability that a random in-domain item outranks a random out-of-domain
// item (ties count half). `higher_is_better` orients the scores.
inline double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive, bool higher_is_better) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto key = [&](std::size_t i) { return higher_is_better ? scores[i] : -scores[i]; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  // Mann-Whitney U with midranks.
  double rank_sum = 0.0, pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && key(order[j]) == key(order[i])) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += mid;
        pos += 1.0;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(scores.size()) - pos;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

}  // namespace domsel::test
