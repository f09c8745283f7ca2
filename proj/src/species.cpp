#include "gibbs/species.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gibbs/clustering.hpp"
#include "gibbs/combinatorics.hpp"
#include "gibbs/errors.hpp"
#include "gibbs/signed_log.hpp"

namespace gibbs {

namespace {

// Inner sums over the coefficient rows drop their tail once terms decay
// below this fraction of the running total.
const double kLogTailCut = std::log(1e-14);

constexpr std::int64_t kExactIntervalMaxM = 5000;

// log sum_j exp(log_V(n', k0+j) + lw[j] - lv_base), consumed left to right;
// stops early once terms are past the peak and negligible.
double log_vrow_sum(const GibbsModel& model, std::int64_t n_prime,
                    std::int64_t k0, const std::vector<double>& lw,
                    double lv_base) {
  double total = neg_inf;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < lw.size(); ++j) {
    const std::int64_t kk = k0 + static_cast<std::int64_t>(j);
    const double lv = kk <= n_prime ? log_V(model, n_prime, kk) : neg_inf;
    const double term = lv + lw[j] - lv_base;
    total = log_add(total, term);
    if (term < prev && term < total + kLogTailCut) break;
    prev = term;
  }
  return total;
}

double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

bool py_positive(const GibbsModel& model) {
  return model.family() == Family::PitmanYor && model.sigma() > 0.0;
}

std::string fmt_line(const std::string& path, std::int64_t lineno) {
  return path + ":" + std::to_string(lineno) + ": ";
}

std::int64_t parse_count_field(const std::string& field,
                               const std::string& path, std::int64_t lineno) {
  if (field.empty())
    throw DataError(fmt_line(path, lineno) + "empty field");
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size())
    throw DataError(fmt_line(path, lineno) + "not an integer: \"" + field +
                    "\"");
  return static_cast<std::int64_t>(v);
}

std::string trimmed(std::string s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.back())) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && is_space(s[b])) ++b;
  return s.substr(b);
}

}  // namespace

SpeciesSample::SpeciesSample(std::int64_t n_, std::int64_t k_,
                             std::map<std::int64_t, std::int64_t> counts)
    : n(n_), k(k_), freq_counts(std::move(counts)) {
  std::int64_t species = 0;
  std::int64_t obs = 0;
  for (auto it = freq_counts.begin(); it != freq_counts.end();) {
    if (it->first < 1)
      throw DataError("species sample: frequencies must be >= 1");
    if (it->second < 0)
      throw DataError("species sample: counts must be >= 0");
    if (it->second == 0) {
      it = freq_counts.erase(it);
      continue;
    }
    species += it->second;
    obs += it->first * it->second;
    ++it;
  }
  if (obs == 0) throw DataError("species sample: no observations");
  if (species != k || obs != n)
    throw DataError("species sample: counts give (n,k) = (" +
                    std::to_string(obs) + "," + std::to_string(species) +
                    "), declared (" + std::to_string(n) + "," +
                    std::to_string(k) + ")");
}

SpeciesSample SpeciesSample::from_counts(
    const std::map<std::int64_t, std::int64_t>& counts) {
  std::int64_t species = 0;
  std::int64_t obs = 0;
  for (const auto& [i, mi] : counts) {
    if (i < 1) throw DataError("species sample: frequencies must be >= 1");
    if (mi < 0) throw DataError("species sample: counts must be >= 0");
    species += mi;
    obs += i * mi;
  }
  return SpeciesSample(obs, species, counts);
}

std::int64_t SpeciesSample::count(std::int64_t i) const {
  const auto it = freq_counts.find(i);
  return it == freq_counts.end() ? 0 : it->second;
}

Partition SpeciesSample::to_partition() const {
  std::vector<std::int64_t> sizes;
  sizes.reserve(static_cast<std::size_t>(k));
  for (const auto& [i, mi] : freq_counts)
    for (std::int64_t c = 0; c < mi; ++c) sizes.push_back(i);
  return Partition::from_sizes(std::move(sizes));
}

SpeciesSample load_frequency_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::map<std::int64_t, std::int64_t> counts;
  std::string line;
  std::int64_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trimmed(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "frequency,count")
        throw DataError(fmt_line(path, lineno) +
                        "expected header \"frequency,count\"");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(fmt_line(path, lineno) + "expected \"i,M_i\"");
    const std::int64_t freq =
        parse_count_field(trimmed(line.substr(0, comma)), path, lineno);
    const std::int64_t cnt =
        parse_count_field(trimmed(line.substr(comma + 1)), path, lineno);
    if (freq < 1)
      throw DataError(fmt_line(path, lineno) + "frequency must be >= 1");
    if (cnt < 0)
      throw DataError(fmt_line(path, lineno) + "count must be >= 0");
    if (!counts.emplace(freq, cnt).second)
      throw DataError(fmt_line(path, lineno) + "duplicate frequency " +
                      std::to_string(freq));
  }
  if (!header_seen) throw DataError(path + ": empty file");
  try {
    return SpeciesSample::from_counts(counts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

SpeciesSample load_raw_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::map<std::string, std::int64_t> occurrences;
  std::string line;
  while (std::getline(in, line)) {
    line = trimmed(line);
    if (line.empty()) continue;
    ++occurrences[line];
  }
  if (occurrences.empty()) throw DataError(path + ": no labels");
  std::map<std::int64_t, std::int64_t> counts;
  for (const auto& [label, c] : occurrences) ++counts[c];
  return SpeciesSample::from_counts(counts);
}

std::string method_name(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::exact_pmf: return "exact_pmf";
    case EstimateMethod::asymptotic: return "asymptotic";
    case EstimateMethod::closed_form: return "closed_form";
  }
  throw DomainError("method_name: unknown method");
}

std::vector<double> pmf_Km_generic(const GibbsModel& model,
                                   const SpeciesSample& s, std::int64_t m) {
  if (m < 1) throw DomainError("pmf_Km: m must be >= 1");
  const double sigma = model.sigma();
  const double gamma =
      -static_cast<double>(s.n) + static_cast<double>(s.k) * sigma;
  const std::vector<double> lw = log_scaled_coeff_row(m, sigma, gamma);
  const double lv_base = log_V(model, s.n, s.k);
  std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
  for (std::int64_t j = 0; j <= m; ++j) {
    const double lv = log_V(model, s.n + m, s.k + j);
    pmf[static_cast<std::size_t>(j)] =
        std::exp(lv + lw[static_cast<std::size_t>(j)] - lv_base);
  }
  return pmf;
}

std::vector<double> pmf_Km(const GibbsModel& model, const SpeciesSample& s,
                           std::int64_t m) {
  if (!py_positive(model)) return pmf_Km_generic(model, s, m);
  if (m < 1) throw DomainError("pmf_Km: m must be >= 1");
  const double sigma = model.sigma();
  const double theta = model.theta();
  const double gamma =
      -static_cast<double>(s.n) + static_cast<double>(s.k) * sigma;
  const std::vector<double> lw = log_scaled_coeff_row(m, sigma, gamma);
  const double lden = log_rising(theta + static_cast<double>(s.n), m);
  const double log_sigma = std::log(sigma);
  std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
  double lpoch = 0.0;  // log (theta/sigma + k)_j
  for (std::int64_t j = 0; j <= m; ++j) {
    pmf[static_cast<std::size_t>(j)] = std::exp(
        lpoch + static_cast<double>(j) * log_sigma +
        lw[static_cast<std::size_t>(j)] - lden);
    lpoch += std::log(theta / sigma + static_cast<double>(s.k + j));
  }
  return pmf;
}

SpeciesEstimateReport estimate_Km(const GibbsModel& model,
                                  const SpeciesSample& s, std::int64_t m,
                                  double level, Rng* rng) {
  if (m < 0) throw DomainError("estimate_Km: m must be >= 0");
  if (level < 0.0 || level >= 1.0)
    throw DomainError("estimate_Km: level must lie in [0,1)");
  if (m == 0) {
    SpeciesEstimateReport report{0.0, std::nullopt,
                                 EstimateMethod::closed_form, model};
    if (level > 0.0) report.interval = CredibleInterval{0.0, 0.0, level};
    return report;
  }

  std::vector<double> pmf;
  double estimate = 0.0;
  EstimateMethod method = EstimateMethod::closed_form;
  if (py_positive(model)) {
    const double sigma = model.sigma();
    const double theta = model.theta();
    const double n = static_cast<double>(s.n);
    estimate = (static_cast<double>(s.k) + theta / sigma) *
               std::expm1(log_rising(theta + n + sigma, m) -
                          log_rising(theta + n, m));
  } else if (model.family() == Family::Dirichlet) {
    const double theta = model.theta();
    for (std::int64_t t = 0; t < m; ++t)
      estimate += theta / (theta + static_cast<double>(s.n + t));
  } else {
    pmf = pmf_Km_generic(model, s, m);
    for (std::int64_t j = 1; j <= m; ++j)
      estimate += static_cast<double>(j) * pmf[static_cast<std::size_t>(j)];
    method = EstimateMethod::exact_pmf;
  }

  SpeciesEstimateReport report{estimate, std::nullopt, method, model};
  if (level == 0.0) return report;

  if (m <= kExactIntervalMaxM) {
    if (pmf.empty()) pmf = pmf_Km(model, s, m);
    const double lo_target = (1.0 - level) / 2.0;
    const double hi_target = (1.0 + level) / 2.0;
    double cdf = 0.0;
    std::int64_t lo = -1, hi = -1;
    for (std::int64_t j = 0; j <= m; ++j) {
      cdf += pmf[static_cast<std::size_t>(j)];
      if (lo < 0 && cdf >= lo_target) lo = j;
      if (hi < 0 && cdf >= hi_target) {
        hi = j;
        break;
      }
    }
    if (hi < 0) hi = m;
    if (lo < 0) lo = hi;
    report.interval =
        CredibleInterval{static_cast<double>(lo), static_cast<double>(hi),
                         level};
    report.method = EstimateMethod::exact_pmf;
    return report;
  }
  if (py_positive(model)) {
    if (rng == nullptr)
      throw DomainError(
          "estimate_Km: the asymptotic interval route needs an rng");
    const auto [lo, hi] = asymptotic_credible_interval_Km(
        model, s.to_partition(), m, level, *rng);
    report.interval = CredibleInterval{lo, hi, level};
    report.method = EstimateMethod::asymptotic;
  }
  // No limit law is wired for the other families: the estimate stands alone
  // beyond the exact cutoff.
  return report;
}

double estimate_new_with_freq_generic(const GibbsModel& model,
                                      const SpeciesSample& s, std::int64_t m,
                                      std::int64_t i) {
  if (m < 1) throw DomainError("estimate_new_with_freq: m must be >= 1");
  if (i < 1 || i > m)
    throw DomainError("estimate_new_with_freq: need 1 <= i <= m");
  const double sigma = model.sigma();
  const double gamma =
      -static_cast<double>(s.n) + static_cast<double>(s.k) * sigma;
  const std::vector<double> lw = log_scaled_coeff_row(m - i, sigma, gamma);
  const double lv_base = log_V(model, s.n, s.k);
  const double inner = log_vrow_sum(model, s.n + m, s.k + 1, lw, lv_base);
  return std::exp(log_binomial(m, i) + log_rising(1.0 - sigma, i - 1) + inner);
}

double estimate_old_with_freq_generic(const GibbsModel& model,
                                      const SpeciesSample& s, std::int64_t m,
                                      std::int64_t i) {
  if (m < 1) throw DomainError("estimate_old_with_freq: m must be >= 1");
  if (i < 1 || i > s.n + m)
    throw DomainError("estimate_old_with_freq: need 1 <= i <= n+m");
  const double sigma = model.sigma();
  const double lv_base = log_V(model, s.n, s.k);
  double total = 0.0;
  for (const auto& [t, mt] : s.freq_counts) {
    if (t > i || i - t > m) continue;
    const double gamma_t = -static_cast<double>(s.n - t) +
                           static_cast<double>(s.k - 1) * sigma;
    const std::vector<double> lw =
        log_scaled_coeff_row(m - (i - t), sigma, gamma_t);
    const double inner = log_vrow_sum(model, s.n + m, s.k, lw, lv_base);
    total += static_cast<double>(mt) *
             std::exp(log_binomial(m, i - t) +
                      log_rising(static_cast<double>(t) - sigma, i - t) +
                      inner);
  }
  return total;
}

namespace {

double new_with_freq_py(const GibbsModel& model, const SpeciesSample& s,
                        std::int64_t m, std::int64_t i) {
  const double sigma = model.sigma();
  const double theta = model.theta();
  const double n = static_cast<double>(s.n);
  return std::exp(log_binomial(m, i) + log_rising(1.0 - sigma, i - 1) +
                  std::log(theta + static_cast<double>(s.k) * sigma) +
                  log_rising(theta + n + sigma, m - i) -
                  log_rising(theta + n, m));
}

double old_with_freq_py(const GibbsModel& model, const SpeciesSample& s,
                        std::int64_t m, std::int64_t i) {
  const double sigma = model.sigma();
  const double theta = model.theta();
  const double n = static_cast<double>(s.n);
  const double lden = log_rising(theta + n, m);
  double total = 0.0;
  for (const auto& [t, mt] : s.freq_counts) {
    if (t > i || i - t > m) continue;
    total += static_cast<double>(mt) *
             std::exp(log_binomial(m, i - t) +
                      log_rising(static_cast<double>(t) - sigma, i - t) +
                      log_rising(theta + n - static_cast<double>(t) + sigma,
                                 m - (i - t)) -
                      lden);
  }
  return total;
}

double future_discovery_py(const GibbsModel& model, const SpeciesSample& s,
                           std::int64_t m, std::int64_t i) {
  const double sigma = model.sigma();
  const double theta = model.theta();
  const double n = static_cast<double>(s.n);
  const double lden = log_rising(theta + n, m + 1);
  double total = 0.0;
  if (i <= m)
    total += std::exp(log_binomial(m, i) + log_rising(1.0 - sigma, i) +
                      std::log(theta + static_cast<double>(s.k) * sigma) +
                      log_rising(theta + n + sigma, m - i) - lden);
  for (const auto& [l, ml] : s.freq_counts) {
    if (l > i || i - l > m) continue;
    total += static_cast<double>(ml) *
             std::exp(log_binomial(m, i - l) +
                      log_rising(static_cast<double>(l) - sigma, i + 1 - l) +
                      log_rising(theta + n - static_cast<double>(l) + sigma,
                                 m - i + l) -
                      lden);
  }
  return total;
}

}  // namespace

double estimate_new_with_freq(const GibbsModel& model, const SpeciesSample& s,
                              std::int64_t m, std::int64_t i) {
  if (py_positive(model)) {
    if (m < 1) throw DomainError("estimate_new_with_freq: m must be >= 1");
    if (i < 1 || i > m)
      throw DomainError("estimate_new_with_freq: need 1 <= i <= m");
    return new_with_freq_py(model, s, m, i);
  }
  return estimate_new_with_freq_generic(model, s, m, i);
}

double estimate_old_with_freq(const GibbsModel& model, const SpeciesSample& s,
                              std::int64_t m, std::int64_t i) {
  if (py_positive(model)) {
    if (m < 1) throw DomainError("estimate_old_with_freq: m must be >= 1");
    if (i < 1 || i > s.n + m)
      throw DomainError("estimate_old_with_freq: need 1 <= i <= n+m");
    return old_with_freq_py(model, s, m, i);
  }
  return estimate_old_with_freq_generic(model, s, m, i);
}

double estimate_rare_variety(const GibbsModel& model, const SpeciesSample& s,
                             std::int64_t m, std::int64_t tau) {
  if (m < 1) throw DomainError("estimate_rare_variety: m must be >= 1");
  if (tau < 1 || tau > s.n + m)
    throw DomainError("estimate_rare_variety: need 1 <= tau <= n+m");
  double total = 0.0;
  for (std::int64_t i = 1; i <= std::min(tau, m); ++i)
    total += estimate_new_with_freq(model, s, m, i);
  for (std::int64_t i = 1; i <= tau; ++i)
    total += estimate_old_with_freq(model, s, m, i);
  return total;
}

double discovery_prob_current(const GibbsModel& model, const SpeciesSample& s,
                              std::int64_t i) {
  if (i < 0 || i > s.n)
    throw DomainError("discovery_prob_current: need 0 <= i <= n");
  if (i == 0) return prob_new(model, s.n, s.k);
  const std::int64_t mi = s.count(i);
  if (mi == 0) return 0.0;
  const double ratio =
      std::exp(log_V(model, s.n + 1, s.k) - log_V(model, s.n, s.k));
  return static_cast<double>(mi) *
         (static_cast<double>(i) - model.sigma()) * ratio;
}

double discovery_prob_future_generic(const GibbsModel& model,
                                     const SpeciesSample& s, std::int64_t m,
                                     std::int64_t i) {
  if (m < 1) throw DomainError("discovery_prob_future: m must be >= 1");
  if (i < 0 || i > s.n + m)
    throw DomainError("discovery_prob_future: need 0 <= i <= n+m");
  const double sigma = model.sigma();
  const double lv_base = log_V(model, s.n, s.k);
  double total = 0.0;
  if (i <= m) {
    const double gamma =
        -static_cast<double>(s.n) + static_cast<double>(s.k) * sigma;
    const std::vector<double> lw = log_scaled_coeff_row(m - i, sigma, gamma);
    const double inner =
        log_vrow_sum(model, s.n + m + 1, s.k + 1, lw, lv_base);
    total +=
        std::exp(log_binomial(m, i) + log_rising(1.0 - sigma, i) + inner);
  }
  for (const auto& [l, ml] : s.freq_counts) {
    if (l > i || i - l > m) continue;
    const double gamma_l = -static_cast<double>(s.n - l) +
                           static_cast<double>(s.k - 1) * sigma;
    const std::vector<double> lw =
        log_scaled_coeff_row(m - i + l, sigma, gamma_l);
    const double inner = log_vrow_sum(model, s.n + m + 1, s.k, lw, lv_base);
    total += static_cast<double>(ml) *
             std::exp(log_binomial(m, i - l) +
                      log_rising(static_cast<double>(l) - sigma, i + 1 - l) +
                      inner);
  }
  return total;
}

double discovery_prob_future(const GibbsModel& model, const SpeciesSample& s,
                             std::int64_t m, std::int64_t i) {
  if (py_positive(model)) {
    if (m < 1) throw DomainError("discovery_prob_future: m must be >= 1");
    if (i < 0 || i > s.n + m)
      throw DomainError("discovery_prob_future: need 0 <= i <= n+m");
    return future_discovery_py(model, s, m, i);
  }
  return discovery_prob_future_generic(model, s, m, i);
}

double turing_estimator(const SpeciesSample& s, std::int64_t i) {
  if (i < 0 || i >= s.n)
    throw DomainError("turing_estimator: need 0 <= i < n");
  return static_cast<double>((i + 1) * s.count(i + 1)) /
         static_cast<double>(s.n);
}

GoodToulminEstimate good_toulmin(const SpeciesSample& s, std::int64_t m) {
  if (m < 1) throw DomainError("good_toulmin: m must be >= 1");
  const double lambda =
      static_cast<double>(m) / static_cast<double>(s.n);
  double u = 0.0;
  double kk = 0.0;
  for (const auto& [i, mi] : s.freq_counts) {
    const double sgn = (i % 2 == 1) ? 1.0 : -1.0;  // (-1)^{i-1}
    u += sgn * std::pow(lambda, static_cast<double>(i - 1)) *
         static_cast<double>(i * mi);
    kk += sgn * std::pow(lambda, static_cast<double>(i)) *
          static_cast<double>(mi);
  }
  u /= static_cast<double>(s.n);
  GoodToulminEstimate out{u, kk, false};
  out.out_of_range = u < 0.0 || u > 1.0 || kk < 0.0;
  return out;
}

namespace {

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;
};

// Nelder-Mead, minimizing. Converged when the simplex's objective spread
// falls below f_tol.
SimplexResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double step, std::int64_t max_iter,
    double f_tol) {
  const std::size_t d = x0.size();
  std::vector<std::pair<double, std::vector<double>>> simplex;
  simplex.reserve(d + 1);
  simplex.emplace_back(f(x0), x0);
  for (std::size_t i = 0; i < d; ++i) {
    auto x = x0;
    x[i] += step;
    simplex.emplace_back(f(x), x);
  }
  const auto order = [&] {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  };
  order();
  for (std::int64_t iter = 0; iter < max_iter; ++iter) {
    if (simplex.back().first - simplex.front().first <
        f_tol * (1.0 + std::fabs(simplex.front().first)))
      return {simplex.front().second, simplex.front().first, true};
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t c = 0; c < d; ++c)
        centroid[c] += simplex[i].second[c] / static_cast<double>(d);
    const auto blend = [&](double coef) {
      std::vector<double> x(d);
      for (std::size_t c = 0; c < d; ++c)
        x[c] = centroid[c] + coef * (simplex.back().second[c] - centroid[c]);
      return x;
    };
    const auto xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < simplex.front().first) {
      const auto xe = blend(-2.0);
      const double fe = f(xe);
      simplex.back() = fe < fr ? std::make_pair(fe, xe)
                               : std::make_pair(fr, xr);
    } else if (fr < simplex[d - 1].first) {
      simplex.back() = {fr, xr};
    } else {
      const auto xc = blend(fr < simplex.back().first ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, simplex.back().first)) {
        simplex.back() = {fc, xc};
      } else {
        for (std::size_t i = 1; i <= d; ++i) {
          for (std::size_t c = 0; c < d; ++c)
            simplex[i].second[c] = 0.5 * (simplex[i].second[c] +
                                          simplex.front().second[c]);
          simplex[i].first = f(simplex[i].second);
        }
      }
    }
    order();
  }
  return {simplex.front().second, simplex.front().first, false};
}

double species_loglik(const GibbsModel& model, const SpeciesSample& s) {
  double ll = log_V(model, s.n, s.k);
  const double sigma = model.sigma();
  for (const auto& [i, mi] : s.freq_counts)
    ll += static_cast<double>(mi) * log_rising(1.0 - sigma, i - 1);
  return ll;
}

}  // namespace

EmpiricalBayesFit empirical_bayes_fit(Family family, const SpeciesSample& s) {
  if (family != Family::Dirichlet && family != Family::PitmanYor &&
      family != Family::NGG)
    throw DomainError(
        "empirical_bayes_fit: families are Dirichlet, PitmanYor, NGG");

  const auto build = [&](const std::vector<double>& x) -> GibbsModel {
    switch (family) {
      case Family::Dirichlet: return GibbsModel::dirichlet(std::exp(x[0]));
      case Family::PitmanYor: {
        const double sigma = logistic(x[0]);
        return GibbsModel::pitman_yor(sigma, std::exp(x[1]) - sigma);
      }
      default: return GibbsModel::ngg(logistic(x[0]), std::exp(x[1]));
    }
  };
  const auto objective = [&](const std::vector<double>& x) -> double {
    try {
      const double ll = species_loglik(build(x), s);
      return std::isfinite(ll) ? -ll : 1e300;
    } catch (const Error&) {
      return 1e300;
    }
  };

  std::vector<std::vector<double>> starts;
  if (family == Family::Dirichlet) {
    for (const double t : {0.5, 5.0, 50.0, 500.0}) starts.push_back({std::log(t)});
  } else {
    for (const double sg : {0.2, 0.5, 0.8})
      for (const double t : {1.0, 10.0, 100.0, 1000.0})
        starts.push_back({std::log(sg / (1.0 - sg)), std::log(t + sg)});
  }

  const bool degenerate = s.k == 1;
  bool any_converged = false;
  SimplexResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (const auto& x0 : starts) {
    const SimplexResult r = nelder_mead(objective, x0, 0.5, 500, 1e-10);
    any_converged = any_converged || r.converged;
    if (r.f < best.f) best = r;
  }
  if (!any_converged && !degenerate)
    throw NumericError(
        "empirical_bayes_fit: no start converged within the iteration "
        "budget");
  if (!std::isfinite(best.f) || best.f >= 1e300)
    throw NumericError("empirical_bayes_fit: likelihood not evaluable");
  return {build(best.x), -best.f, degenerate};
}

}  // namespace gibbs
