#pragma once

// Deliberately naive reference implementations. None of these call into the
// library code they are used to check.

#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mick/tensor.hpp"

namespace mick::testing {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t n = b.rank() == 1 ? 1 : b.shape()[1];
  Tensor out(b.rank() == 1 ? Shape{m} : Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a.values()[i * k + p] * b.values()[p * n + j];
      out.values()[i * n + j] = s;
    }
  }
  return out;
}

inline std::vector<double> direct_softmax(const std::vector<double>& z) {
  double denom = 0.0;
  for (double v : z) denom += std::exp(v);
  std::vector<double> out;
  for (double v : z) out.push_back(std::exp(v) / denom);
  return out;
}

struct SpanOracle {
  std::size_t start;
  std::size_t length;
  friend auto operator<=>(const SpanOracle&, const SpanOracle&) = default;
};

// O(n^2) substring enumeration: a match survives unless some other match
// covers it.
inline std::set<SpanOracle> brute_force_longest(const std::u32string& text,
                                                const std::set<std::u32string>& dict) {
  std::vector<SpanOracle> all;
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (std::size_t l = 1; i + l <= text.size(); ++l) {
      if (dict.count(text.substr(i, l))) all.push_back({i, l});
    }
  }
  std::set<SpanOracle> out;
  for (const auto& s : all) {
    bool covered = false;
    for (const auto& o : all) {
      if (o == s) continue;
      if (o.start <= s.start && s.start + s.length <= o.start + o.length) covered = true;
    }
    if (!covered) out.insert(s);
  }
  return out;
}

// True when some run of consecutive words starts exactly at `start` and
// concatenates to text[start, start + length).
inline bool run_concatenation_oracle(const std::u32string& text, std::size_t start,
                                     std::size_t length,
                                     const std::vector<std::u32string>& words) {
  std::vector<std::size_t> offsets{0};
  for (const auto& w : words) offsets.push_back(offsets.back() + w.size());
  for (std::size_t a = 0; a < words.size(); ++a) {
    for (std::size_t b = a + 1; b <= words.size(); ++b) {
      std::u32string joined;
      for (std::size_t k = a; k < b; ++k) joined += words[k];
      if (offsets[a] == start && joined == text.substr(start, length)) return true;
    }
  }
  return false;
}

}  // namespace mick::testing
