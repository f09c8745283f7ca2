#include "gibbs/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include "gibbs/errors.hpp"

namespace gibbs {

namespace {

// A row of scaled coefficients R(m, .) in the positive regime (gamma <= 0),
// one log entry per cell: a single row can span a dynamic range far beyond
// what doubles with a shared exponent shift could hold (exp(8e4) at m = 10^4).
// Every multiplier m - gamma - sigma j reaching a nonzero cell is positive
// there, so the recurrence is a pure log_add.
struct ScaledRow {
  std::vector<double> lw;
};

// lw'[j] = log((m - gamma - sigma j) exp(lw[j]) + exp(lw[j-1])).
void advance_row(ScaledRow& r, std::int64_t m, double sigma, double gamma) {
  auto& w = r.lw;
  w.push_back(neg_inf);
  for (std::int64_t j = static_cast<std::int64_t>(w.size()) - 1; j >= 1; --j) {
    const auto ju = static_cast<std::size_t>(j);
    const double f =
        static_cast<double>(m) - gamma - sigma * static_cast<double>(j);
    const double scaled = w[ju] == neg_inf ? neg_inf : std::log(f) + w[ju];
    w[ju] = log_add(scaled, w[ju - 1]);
  }
  if (w[0] != neg_inf) {
    const double f0 = static_cast<double>(m) - gamma;
    w[0] = f0 > 0.0 ? w[0] + std::log(f0) : neg_inf;
  }
}

ScaledRow stream_row(std::int64_t m, double sigma, double gamma) {
  ScaledRow r{{0.0}};
  for (std::int64_t t = 0; t < m; ++t) advance_row(r, t, sigma, gamma);
  return r;
}

// Signed regime (gamma > 0): rows in linear space with one shared exponent
// shift. Sign-exact through cancellations, but a row is limited to the
// double dynamic range around its largest entry; intended for moderate m.
struct SignedRow {
  std::vector<double> w;
  double shift = 0.0;
};

SignedRow stream_signed_row(std::int64_t m, double sigma, double gamma) {
  SignedRow r{{1.0}, 0.0};
  for (std::int64_t t = 0; t < m; ++t) {
    auto& w = r.w;
    w.push_back(0.0);
    for (std::int64_t j = static_cast<std::int64_t>(w.size()) - 1; j >= 1;
         --j)
      w[static_cast<std::size_t>(j)] =
          (static_cast<double>(t) - gamma - sigma * static_cast<double>(j)) *
              w[static_cast<std::size_t>(j)] +
          w[static_cast<std::size_t>(j - 1)];
    w[0] *= static_cast<double>(t) - gamma;
    double amax = 0.0;
    for (double v : w) amax = std::max(amax, std::fabs(v));
    if (amax > 1e250 || (amax > 0.0 && amax < 1e-250)) {
      for (double& v : w) v /= amax;
      r.shift += std::log(amax);
    }
  }
  return r;
}

// Triangles cached per (sigma, gamma), grown on demand. Rows beyond the cap
// are streamed without caching: the triangle is quadratic in memory.
class CoeffCache {
 public:
  ScaledRow row(std::int64_t m, double sigma, double gamma) {
    if (m > kCacheMaxRow) return stream_row(m, sigma, gamma);
    const Key key{bits(sigma), bits(gamma)};
    std::lock_guard<std::mutex> lock(mu_);
    auto& tri = map_[key];
    if (tri.empty()) tri.push_back(ScaledRow{{0.0}});
    while (static_cast<std::int64_t>(tri.size()) <= m) {
      ScaledRow next = tri.back();
      advance_row(next, static_cast<std::int64_t>(tri.size()) - 1, sigma,
                  gamma);
      tri.push_back(std::move(next));
    }
    return tri[static_cast<std::size_t>(m)];
  }

 private:
  static constexpr std::int64_t kCacheMaxRow = 1024;
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  static std::uint64_t bits(double x) {
    std::uint64_t b;
    static_assert(sizeof(b) == sizeof(x));
    std::memcpy(&b, &x, sizeof(b));
    return b;
  }
  std::mutex mu_;
  std::map<Key, std::vector<ScaledRow>> map_;
};

CoeffCache& cache() {
  static CoeffCache c;
  return c;
}

void check_sigma(double sigma) {
  if (!(sigma < 1.0) || !std::isfinite(sigma))
    throw DomainError("generalized factorial coefficient needs sigma < 1");
}

}  // namespace

double log_rising(double x, std::int64_t n) {
  if (n < 0) throw DomainError("rising factorial: n must be nonnegative");
  if (!(x > 0.0)) throw DomainError("log_rising needs x > 0");
  if (n == 0) return 0.0;
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

SignedLog rising_factorial(double x, std::int64_t n) {
  if (n < 0) throw DomainError("rising factorial: n must be nonnegative");
  if (n == 0) return SignedLog::one();
  if (x > 0.0) return SignedLog::from_log(log_rising(x, n));
  int sign = 1;
  double lm = 0.0;
  std::int64_t i = 0;
  for (; i < n; ++i) {
    const double f = x + static_cast<double>(i);
    if (f == 0.0) return SignedLog::zero();
    if (f > 0.0) break;
    sign = -sign;
    lm += std::log(-f);
  }
  if (i < n)
    lm += std::lgamma(x + static_cast<double>(n)) -
          std::lgamma(x + static_cast<double>(i));
  return {sign, lm};
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) throw DomainError("binomial: need 0 <= k <= n");
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

double log_scaled_coeff(std::int64_t m, std::int64_t j, double sigma,
                        double gamma) {
  check_sigma(sigma);
  if (m < 0 || j < 0) throw DomainError("scaled coefficient: negative index");
  if (gamma > 0.0)
    throw DomainError("log_scaled_coeff is the positive regime: gamma <= 0");
  if (j > m) return neg_inf;
  return cache().row(m, sigma, gamma).lw[static_cast<std::size_t>(j)];
}

std::vector<double> log_scaled_coeff_row(std::int64_t m, double sigma,
                                         double gamma) {
  check_sigma(sigma);
  if (m < 0) throw DomainError("scaled coefficient: negative row");
  if (gamma > 0.0)
    throw DomainError("log_scaled_coeff_row is the positive regime: gamma <= 0");
  return cache().row(m, sigma, gamma).lw;
}

SignedLog gen_factorial(std::int64_t n, std::int64_t k, double sigma) {
  check_sigma(sigma);
  if (sigma == 0.0)
    throw DomainError("gen_factorial needs sigma != 0; see stirling1_abs");
  if (n < 0 || k < 0) throw DomainError("gen_factorial: negative index");
  if (k > n) return SignedLog::zero();
  const double lv = cache().row(n, sigma, 0.0).lw[static_cast<std::size_t>(k)];
  if (lv == neg_inf) return SignedLog::zero();
  const int sign = sigma < 0.0 && (k & 1) ? -1 : 1;
  return {sign, lv + static_cast<double>(k) * std::log(std::fabs(sigma))};
}

SignedLog noncentral_gen_factorial(std::int64_t m, std::int64_t j,
                                   double sigma, double gamma) {
  check_sigma(sigma);
  if (sigma == 0.0) throw DomainError("noncentral_gen_factorial: sigma != 0");
  if (m < 0 || j < 0)
    throw DomainError("noncentral_gen_factorial: negative index");
  if (j > m) return SignedLog::zero();
  const double lsig = static_cast<double>(j) * std::log(std::fabs(sigma));
  if (gamma <= 0.0) {
    const double lv =
        cache().row(m, sigma, gamma).lw[static_cast<std::size_t>(j)];
    if (lv == neg_inf) return SignedLog::zero();
    const int sign = sigma < 0.0 && (j & 1) ? -1 : 1;
    return {sign, lv + lsig};
  }
  const SignedRow r = stream_signed_row(m, sigma, gamma);
  const double v = r.w[static_cast<std::size_t>(j)];
  if (v == 0.0) return SignedLog::zero();
  int sign = v > 0.0 ? 1 : -1;
  if (sigma < 0.0 && (j & 1)) sign = -sign;
  return {sign, std::log(std::fabs(v)) + r.shift + lsig};
}

double stirling1_abs(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0) throw DomainError("stirling1_abs: negative index");
  if (k > n) return neg_inf;
  return log_scaled_coeff(n, k, 0.0, 0.0);
}

namespace {

// Lentz continued fraction for Gamma(a,x), reliable for x > a + 1.
double log_uig_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 3e-16)
      return a * std::log(x) - x + std::log(h);
  }
  throw NumericError("upper incomplete gamma: continued fraction stalled");
}

// Series for the lower function, a > 0, x <= a + 1; returns log gamma(a,x).
double log_lig_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= 10000; ++n) {
    term *= x / (a + static_cast<double>(n));
    sum += term;
    if (term < sum * 1e-17) return a * std::log(x) - x + std::log(sum);
  }
  throw NumericError("lower incomplete gamma: series stalled");
}

// E1(x) for small x via the classic alternating series.
double e1_small(double x) {
  const double euler = 0.5772156649015328606;
  double sum = -euler - std::log(x);
  double term = 1.0;
  for (int n = 1; n <= 200; ++n) {
    term *= -x / static_cast<double>(n);
    const double add = -term / static_cast<double>(n);
    sum += add;
    if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

}  // namespace

double log_upper_inc_gamma(double a, double x) {
  if (!(x > 0.0)) throw DomainError("log_upper_inc_gamma needs x > 0");
  if (a <= 0.0 && x < 1.0) {
    // Downward recurrence in the scaled variable G(b) = Gamma(b,x) x^{-b} e^x:
    // G(b-1) = (1 - x G(b)) / (1 - b), started inside (0,1].
    double a0 = a - std::floor(a);
    std::int64_t steps = std::llround(a0 - a);
    double g;
    if (a0 == 0.0) {
      g = e1_small(x) * std::exp(x);
    } else {
      const double lg_lower = log_lig_series(a0, x);
      const double lg_upper = log_sub(std::lgamma(a0), lg_lower);
      g = std::exp(lg_upper - a0 * std::log(x) + x);
    }
    double b = a0;
    for (std::int64_t t = 0; t < steps; ++t) {
      g = (1.0 - x * g) / (1.0 - b);
      b -= 1.0;
    }
    if (!(g > 0.0))
      throw NumericError("upper incomplete gamma: recurrence lost positivity");
    return std::log(g) + a * std::log(x) - x;
  }
  if (x > a + 1.0) return log_uig_cf(a, x);
  const double lg_lower = log_lig_series(a, x);
  return log_sub(std::lgamma(a), lg_lower);
}

}  // namespace gibbs
