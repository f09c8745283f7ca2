#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gibbs/models.hpp"
#include "gibbs/rng.hpp"

namespace gibbs {

// Prior law of the number of clusters K_n.
struct KnDistribution {
  std::int64_t n = 0;
  GibbsModel model;
  std::vector<double> pmf;  // pmf[k-1] = P(K_n = k), k = 1..n

  double prob(std::int64_t k) const;
  double mean() const;
  double variance() const;
};

// P(K_n = k) = (V_{n,k}/sigma^k) C(n,k;sigma). The mixture family is handled
// by mixing the conditional finite-Dirichlet pmfs over the latent component
// count, which is exactly equivalent and avoids the sigma < 0 continuation.
KnDistribution prior_Kn_pmf(const GibbsModel& model, std::int64_t n);

// Mean of prior_Kn_pmf, computed from the pmf for every family.
double expected_Kn(const GibbsModel& model, std::int64_t n);

// Solves E(K_n) = target_mean for the free location parameter (theta for
// Dirichlet and Pitman-Yor, beta for NGG) at fixed sigma. Bracketing by
// doubling, then bisection to |E(K_n) - target| <= 1e-4 * target. Raises
// NumericError when no parameter value reaches the target.
GibbsModel elicit(Family family, double sigma, std::int64_t n,
                  double target_mean);

// Scaling sequence c_n of the cluster count: K_n / c_n converges.
// 1 for sigma < 0, log n for sigma = 0, n^sigma for sigma in (0,1).
double cn_rate(double sigma, std::int64_t n);

// Large-m limit law of K_m^{(n)} / m^sigma under PitmanYor(sigma, theta),
// given n observations in k clusters:
//   Z_{n,k} = B(k + theta/sigma, n/sigma - k) * U_q,  q = (theta + n)/sigma,
// with independent factors. U_q is a polynomially tilted positive
// sigma-stable variable; the base stable law is pinned to Laplace transform
// exp(-t^sigma).
struct DiversityLimitLaw {
  double sigma = 0.0;
  double theta = 0.0;
  std::int64_t n = 0;
  std::int64_t k = 0;

  DiversityLimitLaw(double sigma, double theta, std::int64_t n,
                    std::int64_t k);

  // E Z^p = (k + theta/sigma)_p Gamma(theta+n) / Gamma(theta+n+p*sigma)
  double moment(int p) const;
  double mean() const { return moment(1); }
  double variance() const;
};

std::vector<double> sample_Znk(const DiversityLimitLaw& law, Rng& rng,
                               std::int64_t draws);

// sigma-diversity S with polynomial tilt theta >= 0: the n = k = 0 member of
// the family above. theta = 0 gives the raw stable scale limit.
std::vector<double> sample_S_sigma(double sigma, double theta, Rng& rng,
                                   std::int64_t draws);

// Equal-tail interval for the number of new clusters K_m^{(n)} out of m
// additional observations: [m^sigma q_{(1-level)/2}, m^sigma q_{(1+level)/2}]
// with empirical quantiles of Z_{n,k}. PitmanYor with sigma > 0 only; meant
// for the extrapolation regime (roughly m >= 10 n).
std::pair<double, double> asymptotic_credible_interval_Km(
    const GibbsModel& model, const Partition& p, std::int64_t m, double level,
    Rng& rng, std::int64_t draws = 100000);

}  // namespace gibbs
