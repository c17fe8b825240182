#pragma once

// Relevance by explicit enumeration: every line is rendered as a delimited
// string and each term occurrence is found by repeated substring search.

#include <string>

#include "domsel/webfilter.hpp"

namespace domsel::test {

inline std::string delimited(const std::vector<std::string>& tokens) {
  std::string out = "\x1f";
  for (const auto& t : tokens) out += t + "\x1f";
  return out;
}

inline double brute_force_relevance(const webfilter::LocatedDocument& doc, const webfilter::TopicDefinition& topic,
                                    const webfilter::LocationWeights& weights) {
  double total = 0.0;
  for (const auto& term : topic.terms) {
    const auto needle = delimited(term.tokens);
    for (std::size_t j = 0; j < webfilter::kLocationCount; ++j) {
      double n = 0;
      for (const auto& line : doc.lines[j]) {
        const auto hay = delimited(line);
        // Step one character so overlapping matches are found.
        for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) n += 1;
      }
      total += n * term.weight * weights.w[j];
    }
  }
  return total;
}

}  // namespace domsel::test
