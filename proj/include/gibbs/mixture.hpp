#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "gibbs/models.hpp"

namespace gibbs {

// Univariate Gaussian mixture with a Gibbs-type prior on the latent
// partition:
//   y_i | m_i, v_i ~ N(m_i, v_i)                     (v is a variance)
//   (m_i, v_i) | p ~ p,  p ~ Gibbs-type model
//   base  P*(dm, dv) = N(m | mu, tau / v) Ga(v | v_shape, v_rate)
//   mu ~ N(mu0, mu_var),  1/tau ~ Ga(tau_inv_shape, tau_inv_rate)
//
// NOTE: mu_var defaults to 0.001, an unusually tight prior around zero.
// That is the standard specification this module reproduces; override
// mu_var (e.g. to 1000) for data that are not centered near zero.
struct MixtureConfig {
  GibbsModel model = GibbsModel::dirichlet(1.0);
  double mu0 = 0.0;
  double mu_var = 0.001;
  double tau_inv_shape = 1.0;
  double tau_inv_rate = 100.0;
  double v_shape = 2.0;
  double v_rate = 1.0;
  std::int64_t aux_components = 3;
  std::int64_t iters = 100000;
  std::int64_t burnin = 5000;
  std::int64_t thinning = 1;
  std::uint64_t seed = 1;

  // Validation surrogates. fixed_kernel_variance freezes every cluster
  // variance at the given value and drops the Ga component from the base,
  // which makes the kernel conjugate and cluster marginals closed-form.
  // flat_likelihood makes the kernel density constant, so the chain
  // targets the bare partition prior. fixed_mu / fixed_tau pin the
  // hyperparameters instead of sampling them.
  std::optional<double> fixed_kernel_variance;
  std::optional<double> fixed_mu;
  std::optional<double> fixed_tau;
  bool flat_likelihood = false;
};

// One live mixture configuration. Cluster ids are dense 0..k-1; every
// allocation points at a live cluster and sizes sum to the data length.
struct MixtureState {
  std::vector<std::int64_t> allocations;
  std::vector<double> cluster_mean;
  std::vector<double> cluster_var;
  std::vector<std::int64_t> cluster_size;
  double mu = 0.0;
  double tau = 1.0;
};

struct ClusterSnapshot {
  double mean = 0.0;
  double var = 0.0;
  std::int64_t size = 0;
};

// Kept draws. k/mu/tau are recorded for every kept sweep, so
// k_draws.size() == (iters - burnin) / thinning. Full cluster snapshots
// are heavier, so they are subsampled every snapshot_stride kept draws
// (at most ~2000 snapshots per run); snapshot s corresponds to kept draw
// s * snapshot_stride. density_estimate averages over the snapshots.
struct MixtureTrace {
  MixtureConfig config;
  std::int64_t n = 0;
  std::vector<std::int64_t> k_draws;
  std::vector<double> mu_draws;
  std::vector<double> tau_draws;
  std::int64_t snapshot_stride = 1;
  std::vector<std::vector<ClusterSnapshot>> snapshots;
};

// 50 draws from the equal-weight mixture of N(1, 0.2) and N(10, 0.2),
// variance parameterization. Deterministic given the seed.
std::vector<double> simulate_toy_data(std::uint64_t seed);

// Single-chain driver underneath fit(), exposed so validation runs can
// inspect the full state (e.g. allocation patterns) sweep by sweep.
class MixtureChain {
 public:
  MixtureChain(const MixtureConfig& config, const std::vector<double>& data);
  ~MixtureChain();
  MixtureChain(MixtureChain&&) noexcept;
  MixtureChain& operator=(MixtureChain&&) noexcept;

  void sweep();
  const MixtureState& state() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Collapsed-weights MCMC: per-observation allocation updates use the
// Gibbs-type predictive weights, with the new-cluster mass split across
// aux_components fresh base draws (the singleton's parameters seed the
// first slot when its cluster empties); an acceleration step re-draws
// cluster means conjugately and cluster variances by slice sampling on
// log v, then mu (conjugate normal) and 1/tau (conjugate gamma).
// Empty data is allowed and reduces the chain to the hyperpriors, which
// makes density_estimate the prior predictive.
MixtureTrace fit(const MixtureConfig& config, const std::vector<double>& data);

// Empirical posterior of the number of occupied clusters. prob[k] is the
// frequency of k among kept draws; mcse[k] is a batch-means Monte Carlo
// standard error (sqrt(T) batches).
struct KnPosterior {
  std::vector<double> prob;
  std::vector<double> mcse;
};

KnPosterior posterior_Kn_pmf(const MixtureTrace& trace);

// Monte Carlo average over snapshots of the one-step-ahead predictive
// density: new-cluster weight times the base marginal (a 32-node Laguerre
// integral over the kernel variance) plus the (size - sigma)-weighted
// cluster kernels.
std::vector<double> density_estimate(const MixtureTrace& trace,
                                     const std::vector<double>& grid);

}  // namespace gibbs
