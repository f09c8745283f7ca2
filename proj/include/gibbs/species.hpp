#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/models.hpp"
#include "gibbs/rng.hpp"

namespace gibbs {

// Frequency-count view of an observed sample: n observations carrying k
// distinct species, freq_counts[i] = M_i = number of species seen exactly
// i times. Valid when sum_i M_i = k and sum_i i*M_i = n.
struct SpeciesSample {
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::map<std::int64_t, std::int64_t> freq_counts;

  SpeciesSample() = default;
  // Checks both constraints; throws DataError on violation. Zero counts are
  // dropped.
  SpeciesSample(std::int64_t n, std::int64_t k,
                std::map<std::int64_t, std::int64_t> freq_counts);
  // n and k computed from the counts.
  static SpeciesSample from_counts(
      const std::map<std::int64_t, std::int64_t>& counts);

  std::int64_t count(std::int64_t i) const;  // M_i, 0 when absent
  Partition to_partition() const;
};

// CSV with header line "frequency,count" and one "i,M_i" row per frequency.
SpeciesSample load_frequency_counts(const std::string& path);
// Newline-delimited label file, one observation per line; blank lines are
// skipped, everything else is taken verbatim as a species label.
SpeciesSample load_raw_labels(const std::string& path);

enum class EstimateMethod { exact_pmf, asymptotic, closed_form };
std::string method_name(EstimateMethod method);

struct CredibleInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
};

struct SpeciesEstimateReport {
  double estimate = 0.0;
  std::optional<CredibleInterval> interval;
  EstimateMethod method = EstimateMethod::closed_form;
  GibbsModel model;
};

// P(number of new species among m additional observations = j | sample),
// j = 0..m. Pitman-Yor with sigma > 0 takes the closed V-ratio form;
// everything else runs through log V_{n,k} and the scaled coefficient rows,
// with Dirichlet as the sigma -> 0 limit and sigma < 0 entering through the
// family's mixture-form V_{n,k}.
std::vector<double> pmf_Km(const GibbsModel& model, const SpeciesSample& s,
                           std::int64_t m);
// The coefficient-row route for every family, kept separate as the
// cross-check for the Pitman-Yor fast path.
std::vector<double> pmf_Km_generic(const GibbsModel& model,
                                   const SpeciesSample& s, std::int64_t m);

// Posterior mean of the new-species count under squared-error loss.
// level > 0 attaches an equal-tail credible interval: exact pmf quantiles
// for m <= 5000, beyond that the m^sigma limit law of the new-cluster count
// (Pitman-Yor with sigma > 0 only, needs rng; other families carry no
// interval there). method records the least exact ingredient used:
// closed_form when no pmf was evaluated, exact_pmf when one was, asymptotic
// when the limit law was.
SpeciesEstimateReport estimate_Km(const GibbsModel& model,
                                  const SpeciesSample& s, std::int64_t m,
                                  double level = 0.0, Rng* rng = nullptr);

// Expected number of new species observed exactly i times among the m
// additional observations, 1 <= i <= m.
double estimate_new_with_freq(const GibbsModel& model, const SpeciesSample& s,
                              std::int64_t m, std::int64_t i);
// Expected number of initially observed species whose frequency in the
// enlarged sample of n+m equals i, 1 <= i <= n+m.
double estimate_old_with_freq(const GibbsModel& model, const SpeciesSample& s,
                              std::int64_t m, std::int64_t i);
// sum_{i=1}^{tau} (new + old): expected number of species with
// enlarged-sample frequency at most tau, 1 <= tau <= n+m.
double estimate_rare_variety(const GibbsModel& model, const SpeciesSample& s,
                             std::int64_t m, std::int64_t tau);
double estimate_new_with_freq_generic(const GibbsModel& model,
                                      const SpeciesSample& s, std::int64_t m,
                                      std::int64_t i);
double estimate_old_with_freq_generic(const GibbsModel& model,
                                      const SpeciesSample& s, std::int64_t m,
                                      std::int64_t i);

// Probability that the next observation falls in a species currently seen
// i times (i = 0: a species not seen before), 0 <= i <= n.
double discovery_prob_current(const GibbsModel& model, const SpeciesSample& s,
                              std::int64_t i);
// The same probability at step n+m+1, averaged over the unobserved
// additional sample; m >= 1, 0 <= i <= n+m.
double discovery_prob_future(const GibbsModel& model, const SpeciesSample& s,
                             std::int64_t m, std::int64_t i);
double discovery_prob_future_generic(const GibbsModel& model,
                                     const SpeciesSample& s, std::int64_t m,
                                     std::int64_t i);

// (i+1) M_{i+1} / n, the frequentist discovery-probability estimate for the
// next observation; 1 - turing_estimator(s, 0) estimates sample coverage.
double turing_estimator(const SpeciesSample& s, std::int64_t i);

// Frequentist extrapolation to m further observations, lambda = m/n. The
// alternating series turn numerically erratic once lambda grows past 1; raw
// values are always returned, out_of_range reports u_new outside [0,1] or
// k_new < 0.
struct GoodToulminEstimate {
  double u_new = 0.0;  // discovery probability at step n+m+1
  double k_new = 0.0;  // expected new species among the m additions
  bool out_of_range = false;
};
GoodToulminEstimate good_toulmin(const SpeciesSample& s, std::int64_t m);

// Maximizes log V_{n,k} + sum_i M_i log (1-sigma)_{i-1} over the family's
// free parameters: derivative-free simplex search with multiple starts and
// boundary-safe reparameterization (sigma through a logistic map, scale
// parameters through exp). Families: Dirichlet, PitmanYor, NGG. A k = 1
// sample carries no heterogeneity information, so the likelihood is a ridge;
// the fit still runs and is flagged degenerate.
struct EmpiricalBayesFit {
  GibbsModel model;
  double log_likelihood = 0.0;
  bool degenerate = false;
};
EmpiricalBayesFit empirical_bayes_fit(Family family, const SpeciesSample& s);

}  // namespace gibbs
