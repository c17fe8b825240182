#pragma once

// BLEU from position-by-position n-gram enumeration.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace domsel::test {

using Line = std::vector<std::string>;

inline std::size_t occurrences(const Line& s, const Line& s_src, std::size_t at, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t j = 0; j + n <= s.size(); ++j) {
    bool same = true;
    for (std::size_t k = 0; k < n && same; ++k) same = s[j + k] == s_src[at + k];
    c += same;
  }
  return c;
}

// Clipped matches and totals for order n over a whole corpus.
inline std::pair<double, double> clipped(const std::vector<Line>& hyp, const std::vector<Line>& ref, std::size_t n) {
  double m = 0, t = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    const auto& h = hyp[i];
    for (std::size_t p = 0; p + n <= h.size(); ++p) {
      t += 1;
      // Count each distinct n-gram once, at its first position.
      bool first = true;
      for (std::size_t q = 0; q < p && first; ++q) {
        bool same = true;
        for (std::size_t k = 0; k < n && same; ++k) same = h[q + k] == h[p + k];
        first = !same;
      }
      if (first) m += static_cast<double>(std::min(occurrences(h, h, p, n), occurrences(ref[i], h, p, n)));
    }
  }
  return {m, t};
}

inline double oracle_bleu(const std::vector<Line>& hyp, const std::vector<Line>& ref, int max_n = 4) {
  double c = 0, r = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) c += static_cast<double>(hyp[i].size()), r += static_cast<double>(ref[i].size());
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    const auto [m, t] = clipped(hyp, ref, static_cast<std::size_t>(n));
    if (m == 0 || t == 0) return 0.0;
    log_sum += std::log(m / t) / max_n;
  }
  const double bp = c > r ? 1.0 : std::exp(1 - r / c);
  return bp * std::exp(log_sum);
}

}  // namespace domsel::test
