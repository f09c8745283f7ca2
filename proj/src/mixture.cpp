#include "gibbs/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "gibbs/errors.hpp"
#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kSnapshotCap = 2000;

struct LaguerreRule {
  std::vector<double> node;
  std::vector<double> weight;
};

// Gauss-Laguerre rule: sum_i w_i g(x_i) integrates e^{-x} g(x) over
// (0, inf) exactly for polynomial g up to degree 2n-1. Nodes by Newton
// iteration with the usual spacing guesses; weights from L_{n+1}.
LaguerreRule laguerre_rule(int n) {
  LaguerreRule rule;
  rule.node.resize(static_cast<std::size_t>(n));
  rule.weight.resize(static_cast<std::size_t>(n));
  double x = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      x = 3.0 / (1.0 + 2.4 * n);
    } else if (i == 1) {
      x += 15.0 / (1.0 + 2.5 * n);
    } else {
      x += (1.0 + 2.55 * (i - 1)) / (1.9 * (i - 1)) *
           (x - rule.node[static_cast<std::size_t>(i - 2)]);
    }
    double pn = 0.0, pnm1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 1.0 - x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0 - x) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      pn = p1;
      pnm1 = p0;
      const double deriv = n * (p1 - p0) / x;
      const double step = pn / deriv;
      x -= step;
      if (std::fabs(step) <= 1e-14 * std::max(1.0, std::fabs(x))) break;
    }
    rule.node[static_cast<std::size_t>(i)] = x;
    const double lnp1 = ((2.0 * n + 1.0 - x) * pn - n * pnm1) / (n + 1.0);
    const double scaled = (n + 1.0) * lnp1;
    rule.weight[static_cast<std::size_t>(i)] = x / (scaled * scaled);
  }
  return rule;
}

double normal_logpdf(double y, double mean, double var) {
  const double d = y - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

// Density at y of one draw from the base measure given (mu, tau):
// integral of N(y | mu, v + tau/v) against Ga(v | a, b), reduced to a
// Laguerre sum by u = b v.
double base_marginal(double y, double mu, double tau,
                     const MixtureConfig& cfg) {
  if (cfg.fixed_kernel_variance) {
    const double v = *cfg.fixed_kernel_variance;
    return std::exp(normal_logpdf(y, mu, v + tau / v));
  }
  static const LaguerreRule rule = laguerre_rule(32);
  const double a = cfg.v_shape;
  const double b = cfg.v_rate;
  const double lga = std::lgamma(a);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.node.size(); ++i) {
    const double u = rule.node[i];
    const double v = u / b;
    total += rule.weight[i] * std::exp((a - 1.0) * std::log(u) - lga +
                                       normal_logpdf(y, mu, v + tau / v));
  }
  return total;
}

// Stepping-out slice sampler on an unbounded coordinate (Neal 2003).
double slice_sample(double w0, double width,
                    const std::function<double(double)>& logf, Rng& rng) {
  const double ly = logf(w0) - rng.exponential();
  double lo = w0 - width * rng.uniform();
  double hi = lo + width;
  for (int s = 0; s < 64 && logf(lo) > ly; ++s) lo -= width;
  for (int s = 0; s < 64 && logf(hi) > ly; ++s) hi += width;
  for (int s = 0; s < 128; ++s) {
    const double w1 = rng.uniform(lo, hi);
    if (logf(w1) >= ly) return w1;
    (w1 < w0 ? lo : hi) = w1;
  }
  return w0;
}

class Sampler {
 public:
  Sampler(const MixtureConfig& cfg, const std::vector<double>& data)
      : cfg_(cfg),
        data_(data),
        sigma_(cfg.model.sigma()),
        n_(static_cast<std::int64_t>(data.size())),
        rng_(cfg.seed) {
    if (n_ >= 2) {
      lv_small_ = log_V_row(cfg_.model, n_ - 1, 1, n_ - 1);
      lv_big_ = log_V_row(cfg_.model, n_, 1, n_);
    }
    state_.mu = cfg_.fixed_mu.value_or(cfg_.mu0);
    state_.tau =
        cfg_.fixed_tau.value_or(cfg_.tau_inv_rate / cfg_.tau_inv_shape);
    if (n_ > 0) {
      const double mean =
          std::accumulate(data_.begin(), data_.end(), 0.0) /
          static_cast<double>(n_);
      double ss = 0.0;
      for (const double y : data_) ss += (y - mean) * (y - mean);
      const double var = cfg_.fixed_kernel_variance.value_or(
          std::max(ss / static_cast<double>(n_), 1e-2));
      state_.allocations.assign(static_cast<std::size_t>(n_), 0);
      state_.cluster_mean = {mean};
      state_.cluster_var = {var};
      state_.cluster_size = {n_};
    }
  }

  void sweep() {
    if (n_ > 0) {
      update_allocations();
      update_cluster_params();
    }
    update_mu();
    update_tau();
  }

  const MixtureState& state() const { return state_; }
  std::int64_t k() const {
    return static_cast<std::int64_t>(state_.cluster_mean.size());
  }

 private:
  double log_kernel(double y, double mean, double var) const {
    return cfg_.flat_likelihood ? 0.0 : normal_logpdf(y, mean, var);
  }

  void draw_base(double& m, double& v) {
    v = cfg_.fixed_kernel_variance
            ? *cfg_.fixed_kernel_variance
            : rng_.gamma(cfg_.v_shape, cfg_.v_rate);
    m = state_.mu + rng_.normal() * std::sqrt(state_.tau / v);
  }

  void remove_cluster(std::int64_t ci) {
    const std::int64_t last = k() - 1;
    if (ci != last) {
      state_.cluster_mean[static_cast<std::size_t>(ci)] =
          state_.cluster_mean[static_cast<std::size_t>(last)];
      state_.cluster_var[static_cast<std::size_t>(ci)] =
          state_.cluster_var[static_cast<std::size_t>(last)];
      state_.cluster_size[static_cast<std::size_t>(ci)] =
          state_.cluster_size[static_cast<std::size_t>(last)];
      for (auto& a : state_.allocations)
        if (a == last) a = ci;
    }
    state_.cluster_mean.pop_back();
    state_.cluster_var.pop_back();
    state_.cluster_size.pop_back();
  }

  void update_allocations() {
    const std::int64_t A = cfg_.aux_components;
    aux_m_.resize(static_cast<std::size_t>(A));
    aux_v_.resize(static_cast<std::size_t>(A));
    for (std::int64_t i = 0; i < n_; ++i) {
      const double y = data_[static_cast<std::size_t>(i)];
      const std::int64_t ci = state_.allocations[static_cast<std::size_t>(i)];
      std::int64_t seeded = 0;
      if (--state_.cluster_size[static_cast<std::size_t>(ci)] == 0) {
        aux_m_[0] = state_.cluster_mean[static_cast<std::size_t>(ci)];
        aux_v_[0] = state_.cluster_var[static_cast<std::size_t>(ci)];
        seeded = 1;
        remove_cluster(ci);
      }
      for (std::int64_t c = seeded; c < A; ++c)
        draw_base(aux_m_[static_cast<std::size_t>(c)],
                  aux_v_[static_cast<std::size_t>(c)]);

      const std::int64_t kk = k();
      double lold = kNegInf;
      double lnew = 0.0;
      if (n_ >= 2) {
        lold = lv_big_[static_cast<std::size_t>(kk - 1)] -
               lv_small_[static_cast<std::size_t>(kk - 1)];
        lnew = kk < n_ ? lv_big_[static_cast<std::size_t>(kk)] -
                             lv_small_[static_cast<std::size_t>(kk - 1)]
                       : kNegInf;
      }
      logw_.assign(static_cast<std::size_t>(kk + A), 0.0);
      for (std::int64_t j = 0; j < kk; ++j)
        logw_[static_cast<std::size_t>(j)] =
            lold +
            std::log(static_cast<double>(
                         state_.cluster_size[static_cast<std::size_t>(j)]) -
                     sigma_) +
            log_kernel(y, state_.cluster_mean[static_cast<std::size_t>(j)],
                       state_.cluster_var[static_cast<std::size_t>(j)]);
      const double lsplit = std::log(static_cast<double>(A));
      for (std::int64_t c = 0; c < A; ++c)
        logw_[static_cast<std::size_t>(kk + c)] =
            lnew - lsplit +
            log_kernel(y, aux_m_[static_cast<std::size_t>(c)],
                       aux_v_[static_cast<std::size_t>(c)]);

      double top = kNegInf;
      for (const double lw : logw_) top = std::max(top, lw);
      double total = 0.0;
      for (auto& lw : logw_) {
        lw = std::exp(lw - top);
        total += lw;
      }
      double u = rng_.uniform() * total;
      std::size_t pick = logw_.size() - 1;
      for (std::size_t c = 0; c < logw_.size(); ++c) {
        u -= logw_[c];
        if (u < 0.0) {
          pick = c;
          break;
        }
      }
      if (pick < static_cast<std::size_t>(kk)) {
        state_.allocations[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(pick);
        ++state_.cluster_size[pick];
      } else {
        const std::size_t c = pick - static_cast<std::size_t>(kk);
        state_.allocations[static_cast<std::size_t>(i)] = kk;
        state_.cluster_mean.push_back(aux_m_[c]);
        state_.cluster_var.push_back(aux_v_[c]);
        state_.cluster_size.push_back(1);
      }
    }
  }

  void update_cluster_params() {
    const std::size_t kk = state_.cluster_mean.size();
    sum_x_.assign(kk, 0.0);
    sum_x2_.assign(kk, 0.0);
    for (std::int64_t i = 0; i < n_; ++i) {
      const auto c =
          static_cast<std::size_t>(state_.allocations[static_cast<std::size_t>(i)]);
      const double y = data_[static_cast<std::size_t>(i)];
      sum_x_[c] += y;
      sum_x2_[c] += y * y;
    }
    const bool with_data = !cfg_.flat_likelihood;
    for (std::size_t j = 0; j < kk; ++j) {
      const double nj = static_cast<double>(state_.cluster_size[j]);
      const double vj = state_.cluster_var[j];
      double prec = vj / state_.tau;
      double num = state_.mu * vj / state_.tau;
      if (with_data) {
        prec += nj / vj;
        num += sum_x_[j] / vj;
      }
      state_.cluster_mean[j] = num / prec + rng_.normal() / std::sqrt(prec);

      if (cfg_.fixed_kernel_variance) continue;
      const double mj = state_.cluster_mean[j];
      const double base_quad = (mj - state_.mu) * (mj - state_.mu) /
                               (2.0 * state_.tau);
      const double ss =
          sum_x2_[j] - 2.0 * mj * sum_x_[j] + nj * mj * mj;
      const auto logf = [&](double w) {
        const double v = std::exp(w);
        double lp = cfg_.v_shape * w - cfg_.v_rate * v;
        lp += 0.5 * w - v * base_quad;
        if (with_data) lp += -0.5 * nj * w - 0.5 * ss / v;
        return lp;
      };
      const double w1 = slice_sample(std::log(vj), 1.0, logf, rng_);
      state_.cluster_var[j] = std::exp(w1);
    }
  }

  void update_mu() {
    if (cfg_.fixed_mu) return;
    double prec = 1.0 / cfg_.mu_var;
    double num = cfg_.mu0 / cfg_.mu_var;
    for (std::size_t j = 0; j < state_.cluster_mean.size(); ++j) {
      prec += state_.cluster_var[j] / state_.tau;
      num += state_.cluster_var[j] * state_.cluster_mean[j] / state_.tau;
    }
    state_.mu = num / prec + rng_.normal() / std::sqrt(prec);
  }

  void update_tau() {
    if (cfg_.fixed_tau) return;
    double quad = 0.0;
    for (std::size_t j = 0; j < state_.cluster_mean.size(); ++j) {
      const double d = state_.cluster_mean[j] - state_.mu;
      quad += state_.cluster_var[j] * d * d;
    }
    const double shape = cfg_.tau_inv_shape + 0.5 * static_cast<double>(k());
    const double rate = cfg_.tau_inv_rate + 0.5 * quad;
    state_.tau = 1.0 / rng_.gamma(shape, rate);
  }

  const MixtureConfig& cfg_;
  const std::vector<double>& data_;
  double sigma_;
  std::int64_t n_;
  Rng rng_;
  MixtureState state_;
  std::vector<double> lv_small_;  // log V_{n-1,k}, index k-1
  std::vector<double> lv_big_;    // log V_{n,k},   index k-1
  std::vector<double> aux_m_, aux_v_, logw_, sum_x_, sum_x2_;
};

void validate(const MixtureConfig& cfg) {
  if (cfg.iters <= cfg.burnin || cfg.burnin < 0)
    throw DataError("mixture: need iters > burnin >= 0");
  if (cfg.aux_components < 1)
    throw DataError("mixture: need aux_components >= 1");
  if (cfg.thinning < 1) throw DataError("mixture: need thinning >= 1");
  if (!(cfg.mu_var > 0.0)) throw DataError("mixture: mu_var must be > 0");
  if (!(cfg.tau_inv_shape > 0.0) || !(cfg.tau_inv_rate > 0.0))
    throw DataError("mixture: tau prior parameters must be > 0");
  if (!(cfg.v_shape > 0.0) || !(cfg.v_rate > 0.0))
    throw DataError("mixture: v prior parameters must be > 0");
  if (cfg.fixed_kernel_variance && !(*cfg.fixed_kernel_variance > 0.0))
    throw DataError("mixture: fixed_kernel_variance must be > 0");
  if (cfg.fixed_tau && !(*cfg.fixed_tau > 0.0))
    throw DataError("mixture: fixed_tau must be > 0");
}

}  // namespace

std::vector<double> simulate_toy_data(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(50);
  const double sd = std::sqrt(0.2);
  for (auto& y : out) {
    const double mean = rng.uniform() < 0.5 ? 1.0 : 10.0;
    y = mean + sd * rng.normal();
  }
  return out;
}

struct MixtureChain::Impl {
  Impl(const MixtureConfig& config, const std::vector<double>& data)
      : config_copy(config), data_copy(data), sampler(config_copy, data_copy) {}

  // the sampler keeps references, so pin copies next to it
  MixtureConfig config_copy;
  std::vector<double> data_copy;
  Sampler sampler;
};

MixtureChain::MixtureChain(const MixtureConfig& config,
                           const std::vector<double>& data) {
  validate(config);
  impl_ = std::make_unique<Impl>(config, data);
}

MixtureChain::~MixtureChain() = default;
MixtureChain::MixtureChain(MixtureChain&&) noexcept = default;
MixtureChain& MixtureChain::operator=(MixtureChain&&) noexcept = default;

void MixtureChain::sweep() { impl_->sampler.sweep(); }

const MixtureState& MixtureChain::state() const {
  return impl_->sampler.state();
}

MixtureTrace fit(const MixtureConfig& config, const std::vector<double>& data) {
  validate(config);
  Sampler sampler(config, data);
  MixtureTrace trace;
  trace.config = config;
  trace.n = static_cast<std::int64_t>(data.size());
  const std::int64_t kept = (config.iters - config.burnin) / config.thinning;
  trace.snapshot_stride = std::max<std::int64_t>(
      1, (kept + kSnapshotCap - 1) / kSnapshotCap);
  trace.k_draws.reserve(static_cast<std::size_t>(kept));
  trace.mu_draws.reserve(static_cast<std::size_t>(kept));
  trace.tau_draws.reserve(static_cast<std::size_t>(kept));
  std::int64_t kept_idx = 0;
  for (std::int64_t sweep = 1; sweep <= config.iters; ++sweep) {
    sampler.sweep();
    if (sweep <= config.burnin ||
        (sweep - config.burnin) % config.thinning != 0)
      continue;
    const auto& st = sampler.state();
    trace.k_draws.push_back(sampler.k());
    trace.mu_draws.push_back(st.mu);
    trace.tau_draws.push_back(st.tau);
    if (kept_idx % trace.snapshot_stride == 0) {
      std::vector<ClusterSnapshot> snap(st.cluster_mean.size());
      for (std::size_t j = 0; j < snap.size(); ++j)
        snap[j] = {st.cluster_mean[j], st.cluster_var[j],
                   st.cluster_size[j]};
      trace.snapshots.push_back(std::move(snap));
    }
    ++kept_idx;
  }
  return trace;
}

KnPosterior posterior_Kn_pmf(const MixtureTrace& trace) {
  if (trace.k_draws.empty())
    throw DataError("posterior_Kn_pmf: empty trace");
  const auto T = static_cast<std::int64_t>(trace.k_draws.size());
  const std::int64_t kmax =
      *std::max_element(trace.k_draws.begin(), trace.k_draws.end());
  KnPosterior post;
  post.prob.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (const std::int64_t kd : trace.k_draws)
    post.prob[static_cast<std::size_t>(kd)] += 1.0;
  for (auto& p : post.prob) p /= static_cast<double>(T);

  post.mcse.assign(post.prob.size(), 0.0);
  const auto batch_len = static_cast<std::int64_t>(
      std::floor(std::sqrt(static_cast<double>(T))));
  const std::int64_t batches = batch_len > 0 ? T / batch_len : 0;
  if (batches >= 2) {
    for (std::size_t kv = 0; kv < post.prob.size(); ++kv) {
      double ssum = 0.0, ssum2 = 0.0;
      for (std::int64_t b = 0; b < batches; ++b) {
        std::int64_t hits = 0;
        for (std::int64_t t = b * batch_len; t < (b + 1) * batch_len; ++t)
          if (trace.k_draws[static_cast<std::size_t>(t)] ==
              static_cast<std::int64_t>(kv))
            ++hits;
        const double bm = static_cast<double>(hits) /
                          static_cast<double>(batch_len);
        ssum += bm;
        ssum2 += bm * bm;
      }
      const double mean = ssum / static_cast<double>(batches);
      const double var =
          std::max(0.0, (ssum2 - static_cast<double>(batches) * mean * mean) /
                            static_cast<double>(batches - 1));
      post.mcse[kv] = std::sqrt(var / static_cast<double>(batches));
    }
  }
  return post;
}

std::vector<double> density_estimate(const MixtureTrace& trace,
                                     const std::vector<double>& grid) {
  if (trace.snapshots.empty())
    throw DataError("density_estimate: empty trace");
  if (grid.empty()) throw DataError("density_estimate: empty grid");
  const auto& cfg = trace.config;
  const double sigma = cfg.model.sigma();
  std::vector<double> lv_n, lv_np1;
  if (trace.n > 0) {
    lv_n = log_V_row(cfg.model, trace.n, 1, trace.n);
    lv_np1 = log_V_row(cfg.model, trace.n + 1, 1, trace.n + 1);
  }
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    const auto& snap = trace.snapshots[s];
    const auto kept =
        static_cast<std::size_t>(static_cast<std::int64_t>(s) *
                                 trace.snapshot_stride);
    const double mu = trace.mu_draws[kept];
    const double tau = trace.tau_draws[kept];
    const auto kk = static_cast<std::int64_t>(snap.size());
    double w_new = 1.0;
    double w_old = 0.0;
    if (trace.n > 0) {
      const double lv_base = lv_n[static_cast<std::size_t>(kk - 1)];
      w_new = std::exp(lv_np1[static_cast<std::size_t>(kk)] - lv_base);
      w_old = std::exp(lv_np1[static_cast<std::size_t>(kk - 1)] - lv_base);
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double d = w_new * base_marginal(grid[g], mu, tau, cfg);
      for (const auto& c : snap)
        d += w_old * (static_cast<double>(c.size) - sigma) *
             std::exp(normal_logpdf(grid[g], c.mean, c.var));
      out[g] += d;
    }
  }
  for (auto& d : out) d /= static_cast<double>(trace.snapshots.size());
  return out;
}

}  // namespace gibbs
