#pragma once

// Independent oracles used across the test suite: exact rational arithmetic
// for factorial coefficients and partition probabilities, enumeration over
// partition classes, and a forward dynamic program for cluster-count laws.
// Everything here is built from definitions only, never from the library's
// own recurrences or quadratures.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Rat = boost::multiprecision::cpp_rational;
using Big = boost::multiprecision::cpp_int;
using F100 = boost::multiprecision::cpp_bin_float_100;

inline Big factorial(std::int64_t n) {
  Big acc = 1;
  for (std::int64_t i = 2; i <= n; ++i) acc *= i;
  return acc;
}

inline Big binom(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  Big acc = 1;
  for (std::int64_t i = 0; i < k; ++i) {
    acc *= n - i;
    acc /= i + 1;
  }
  return acc;
}

inline Rat rising(const Rat& x, std::int64_t n) {
  Rat acc = 1;
  for (std::int64_t i = 0; i < n; ++i) acc *= x + i;
  return acc;
}

// C(n,k;sigma) = (1/k!) sum_j (-1)^j binom(k,j) (-j sigma)_n
inline Rat gen_factorial_defsum(std::int64_t n, std::int64_t k,
                                const Rat& sigma) {
  Rat acc = 0;
  for (std::int64_t j = 0; j <= k; ++j) {
    Rat term = Rat(binom(k, j)) * rising(-Rat(j) * sigma, n);
    acc += (j % 2 == 0) ? term : -term;
  }
  return acc / Rat(factorial(k));
}

// C(m,j;sigma,gamma) = (1/j!) sum_i (-1)^i binom(j,i) (-gamma - i sigma)_m,
// the convention with seed C(m,0) = (-gamma)_m and generating identity
// sum_j C(m,j;sigma,gamma) (t)_j = (sigma t - gamma)_m.
inline Rat noncentral_defsum(std::int64_t m, std::int64_t j, const Rat& sigma,
                             const Rat& gamma) {
  Rat acc = 0;
  for (std::int64_t i = 0; i <= j; ++i) {
    Rat term = Rat(binom(j, i)) * rising(-gamma - Rat(i) * sigma, m);
    acc += (i % 2 == 0) ? term : -term;
  }
  return acc / Rat(factorial(j));
}

// Triangular table of C(m,j;sigma,gamma) grown by the production recurrence
// but in exact rationals, so recurrence-vs-definition can be asserted with
// zero tolerance.
inline std::vector<std::vector<Rat>> noncentral_table_rec(
    std::int64_t m_max, const Rat& sigma, const Rat& gamma) {
  std::vector<std::vector<Rat>> tri;
  tri.push_back({Rat(1)});
  for (std::int64_t m = 0; m < m_max; ++m) {
    const auto& cur = tri.back();
    std::vector<Rat> next(static_cast<std::size_t>(m) + 2, Rat(0));
    for (std::int64_t j = 0; j <= m; ++j) {
      next[static_cast<std::size_t>(j)] +=
          (Rat(m) - gamma - sigma * Rat(j)) * cur[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(j) + 1] +=
          sigma * cur[static_cast<std::size_t>(j)];
    }
    tri.push_back(std::move(next));
  }
  return tri;
}

struct SignedLogVal {
  int sign = 0;
  double log_mag = 0.0;
};

inline SignedLogVal to_signed_log(const Rat& r) {
  if (r == 0) return {0, 0.0};
  const F100 f = static_cast<F100>(r);
  const F100 lm = boost::multiprecision::log(boost::multiprecision::abs(f));
  return {r > 0 ? 1 : -1, lm.convert_to<double>()};
}

inline double to_double(const Rat& r) {
  return static_cast<F100>(r).convert_to<double>();
}

// Partition classes of n: block-size multisets together with the number of
// set partitions realizing each multiset, n! / (prod s_i! * prod mult_c!).
struct PartitionClass {
  std::vector<std::int64_t> sizes;  // nonincreasing
  Big count;
};

inline std::vector<PartitionClass> partition_classes(std::int64_t n) {
  std::vector<PartitionClass> out;
  std::vector<std::int64_t> parts;
  std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t rest,
                                                            std::int64_t mx) {
    if (rest == 0) {
      Big denom = 1;
      std::int64_t run = 1;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        denom *= factorial(parts[i]);
        if (i + 1 < parts.size() && parts[i + 1] == parts[i])
          ++run;
        else {
          denom *= factorial(run);
          run = 1;
        }
      }
      out.push_back({parts, factorial(n) / denom});
      return;
    }
    for (std::int64_t p = std::min(rest, mx); p >= 1; --p) {
      parts.push_back(p);
      rec(rest - p, p);
      parts.pop_back();
    }
  };
  rec(n, n);
  return out;
}

// Law of the cluster count after n steps of the one-at-a-time chain
// K_{t+1} = K_t + Bernoulli(p_new(t, K_t)), K_1 = 1. Returns P(K_n = k) for
// k = 1..n. Only the supplied p_new enters; no partition-count formulas.
inline std::vector<double> forward_kn_dp(
    const std::function<double(std::int64_t, std::int64_t)>& p_new,
    std::int64_t n) {
  std::vector<double> prob{1.0};  // prob[j] = P(K_t = j+1)
  for (std::int64_t t = 1; t < n; ++t) {
    std::vector<double> next(prob.size() + 1, 0.0);
    for (std::size_t j = 0; j < prob.size(); ++j) {
      if (prob[j] == 0.0) continue;
      const double pn = p_new(t, static_cast<std::int64_t>(j) + 1);
      next[j] += prob[j] * (1.0 - pn);
      next[j + 1] += prob[j] * pn;
    }
    prob = std::move(next);
  }
  return prob;
}

}  // namespace oracle
