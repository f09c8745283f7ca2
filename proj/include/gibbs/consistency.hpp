#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/models.hpp"
#include "gibbs/rng.hpp"

namespace gibbs {

// Data-generating truth for the consistency experiments. Only the induced
// path of the distinct-value count kappa_n matters: a diffuse truth yields
// all-distinct samples, so kappa_n = n with no randomness; a discrete
// truth yields a slowly growing kappa_n, simulated by iid sampling.
class TruthRegime {
 public:
  enum class Kind { Diffuse, DiscreteUniform, DiscreteGeometric };

  static TruthRegime diffuse();
  static TruthRegime discrete_uniform(std::int64_t n_symbols);
  // P(X = j) = (1 - q) q^{j-1} on j = 1, 2, ...
  static TruthRegime discrete_geometric(double q);

  Kind kind() const { return kind_; }
  std::int64_t n_symbols() const;  // DiscreteUniform only
  double q() const;                // DiscreteGeometric only
  std::string name() const;

 private:
  TruthRegime(Kind k, std::int64_t n_symbols, double q)
      : kind_(k), n_symbols_(n_symbols), q_(q) {}
  Kind kind_;
  std::int64_t n_symbols_ = 0;
  double q_ = 0.0;
};

struct TrajectoryPoint {
  std::int64_t n = 0;
  std::int64_t kappa = 0;  // distinct values among the first n draws
  double ratio = 0.0;      // V_{n+1,kappa+1} / V_{n,kappa}; NaN when the
                           // model puts no mass on kappa clusters
};

// New-value probability along a kappa_n path drawn from the regime,
// reported on a log-spaced grid of n values: every n up to 10, then about
// twenty points per decade, with n_max always the last entry. The rng is
// consulted only by the discrete regimes.
std::vector<TrajectoryPoint> alpha_trajectory(const GibbsModel& model,
                                              const TruthRegime& regime,
                                              std::int64_t n_max, Rng& rng);

// Cataloged limit of the new-value probability, where one is known.
// Diffuse truth: Dirichlet -> 0; PitmanYor and NGG with discount sigma in
// [0,1) -> sigma; Gnedin -> 1; unit-discount finite-Dirichlet mixtures ->
// 0 for Poisson mixing, eta / (1 + sqrt(1-eta))^2 for geometric(eta)
// mixing, 1 for gnedin mixing. Discrete truth: 0 for every model that can
// accommodate the truth's distinct values (a cluster cap below them makes
// the limit claim vacuous). nullopt when nothing is cataloged.
std::optional<double> alpha_theoretical(const GibbsModel& model,
                                        const TruthRegime& regime);

// Numeric check of the tail conditions on a mixing pmf over m <= m_max,
// with r(m) = pi(m+1)/pi(m):
//   T1 (discrete-truth consistency): r(m) <= 1 for sufficiently large m.
//       Verified when the bound holds over at least the last quarter of
//       the window; t1_from is the smallest m from which it holds through
//       m_max (-1 when it fails at m_max itself).
//   T2 (diffuse-truth consistency): r(m) <= M/m for some constant M, i.e.
//       m r(m) stays bounded. t2_constant estimates the eventual bound as
//       the maximum of m r(m) over the second half of the window, and the
//       condition is declared failed when m r(m) still grows across that
//       half (more than 25% from midpoint to m_max) or is infinite.
struct TailConditionReport {
  std::int64_t m_max = 0;
  bool t1_holds = false;
  std::int64_t t1_from = -1;
  bool t2_holds = false;
  double t2_constant = 0.0;
  std::vector<double> ratio;  // ratio[m-1] = pi(m+1)/pi(m), m = 1..m_max
};

TailConditionReport check_tail_conditions(const MixingPMF& mixing,
                                          std::int64_t m_max);

}  // namespace gibbs
