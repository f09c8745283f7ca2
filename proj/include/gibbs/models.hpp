#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "gibbs/rng.hpp"
#include "gibbs/signed_log.hpp"

namespace gibbs {

enum class Family {
  Dirichlet,
  PitmanYor,
  NGG,
  Gnedin,
  MixedFiniteDirichlet,
};

std::string family_name(Family f);

// Distribution of the latent number of components for the finite-Dirichlet
// mixture family. Support is {1, 2, ...}.
class MixingPMF {
 public:
  enum class Kind { Poisson, Geometric, Gnedin, Explicit };

  static MixingPMF poisson(double lambda);       // zero-truncated Poisson
  static MixingPMF geometric(double eta);        // pi(m) = (1-eta) eta^{m-1}
  static MixingPMF gnedin(double gamma);         // pi(m) = g (1-g)_{m-1}/m!
  static MixingPMF explicit_weights(std::vector<double> w);  // w[i]: pi(i+1)

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  double log_pmf(std::int64_t m) const;
  // log of an upper bound on P(m~ > cut); exact for geometric, gnedin and
  // explicit tails.
  double log_survival(std::int64_t cut) const;
  std::int64_t support_max() const;  // -1 when unbounded

  nlohmann::json to_json() const;
  static MixingPMF from_json(const nlohmann::json& j);

 private:
  MixingPMF(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_ = 0.0;
  std::vector<double> weights_;      // Explicit only
  std::vector<double> log_tail_;     // Explicit only: log P(m~ > i)
};

// One member of the Gibbs-type family, pinned down by its discount sigma and
// the family-specific parameters that determine the V_{n,k} weights.
class GibbsModel {
 public:
  static GibbsModel dirichlet(double theta);
  static GibbsModel pitman_yor(double sigma, double theta);
  static GibbsModel ngg(double sigma, double beta);
  static GibbsModel gnedin(double gamma);
  static GibbsModel mixed_finite_dirichlet(double abs_sigma, MixingPMF pi);

  Family family() const { return family_; }
  // Discount parameter: 0 for Dirichlet, -1 for Gnedin, -|sigma| for the
  // finite-Dirichlet mixture.
  double sigma() const;
  double theta() const;         // Dirichlet, PitmanYor
  double beta() const;          // NGG
  double gnedin_gamma() const;  // Gnedin
  double abs_sigma() const;     // MixedFiniteDirichlet
  const MixingPMF& mixing() const;

  // Hard upper bound on the number of clusters; -1 when unbounded.
  std::int64_t max_clusters() const;

  double truncation_tol() const { return trunc_tol_; }
  void set_truncation_tol(double tol);

  std::string name() const;
  nlohmann::json to_json() const;
  static GibbsModel from_json(const nlohmann::json& j);
  // Accepts "family:p1,p2,..." or a JSON object string.
  static GibbsModel parse(const std::string& text);

 private:
  GibbsModel() = default;
  Family family_ = Family::Dirichlet;
  double a_ = 0.0;  // theta | sigma | gamma | abs_sigma
  double b_ = 0.0;  // theta | beta
  std::vector<MixingPMF> mixing_;  // 0 or 1 elements
  double trunc_tol_ = 1e-12;
};

// Unordered set partition recorded as block sizes.
struct Partition {
  std::int64_t n = 0;
  std::vector<std::int64_t> sizes;

  std::int64_t k() const { return static_cast<std::int64_t>(sizes.size()); }
  static Partition from_sizes(std::vector<std::int64_t> sizes);
  static Partition from_labels(const std::vector<std::int64_t>& labels);
  void validate() const;
};

// log V_{n,k}; -inf when k exceeds the family's cluster cap.
double log_V(const GibbsModel& model, std::int64_t n, std::int64_t k);

// log V_{n,k} for k = k_lo..k_hi at fixed n.
std::vector<double> log_V_row(const GibbsModel& model, std::int64_t n,
                              std::int64_t k_lo, std::int64_t k_hi);

// log of the partition probability V_{n,k} prod_i (1-sigma)_{n_i - 1}.
double log_eppf(const GibbsModel& model, const Partition& p);

// Closed-form partition probabilities, kept separate as cross-check routes.
double log_eppf_dirichlet_closed(double theta, const Partition& p);
double log_eppf_pitman_yor_closed(double sigma, double theta,
                                  const Partition& p);

// Probability that observation n+1 starts a new cluster given k clusters.
double prob_new(const GibbsModel& model, std::int64_t n, std::int64_t k);

// [w_new, w_1, ..., w_k]; sums to 1.
std::vector<double> predictive_weights(const GibbsModel& model,
                                       const Partition& p);

Partition sample_partition(const GibbsModel& model, std::int64_t n, Rng& rng);

struct CheckResult {
  bool ok = true;
  std::string detail;
};

// EPPF coherence under adding one observation, all partitions with n < n_max.
CheckResult check_addition_rule(const GibbsModel& model, std::int64_t n_max);

// Characteristic dependence structure of the predictive rule:
// (a) the new-cluster probability depends on the partition through (n,k)
// only, (b) existing-cluster weights are proportional to n_j - sigma,
// (c) the two orders of (new value, growth of cluster j) give the same
// two-step mass. EPPF-ratio route, partitions enumerated up to n_max.
CheckResult check_gibbs_dependence(const GibbsModel& model,
                                   std::int64_t n_max);

}  // namespace gibbs
