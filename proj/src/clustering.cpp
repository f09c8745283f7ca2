#include "gibbs/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gibbs/combinatorics.hpp"
#include "gibbs/errors.hpp"
#include "gibbs/signed_log.hpp"

namespace gibbs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::int64_t kMaxMixingTerms = 2000000;

// Draws U_q, the polynomially tilted positive sigma-stable factor. Angular
// decomposition: u on (0, pi) has density proportional to A(u)^{-delta} with
// delta = q (1 - sigma) and
//   log A(u) = [sigma log sin(sigma u) + (1-sigma) log sin((1-sigma) u)
//               - log sin u] / (1 - sigma),
// and given u, U_q = Y^{1-sigma} with Y ~ Gamma(delta + 1, rate A(u)).
// phi(u) = delta (log A(u) - log A(0)) increases from 0, so a grid with equal
// phi increments gives an exact piecewise-constant envelope; the tail beyond
// phi = 46 carries relative mass below exp(-46).
class TiltedUSampler {
 public:
  TiltedUSampler(double sigma, double q)
      : sigma_(sigma), delta_(q * (1.0 - sigma)) {
    log_a0_ = (sigma_ * std::log(sigma_) +
               (1.0 - sigma_) * std::log1p(-sigma_)) /
              (1.0 - sigma_);
    if (delta_ == 0.0) return;  // u is uniform on (0, pi)
    const double u_top = kPi - 1e-9;
    double phi_top = phi(u_top);
    double u_max = u_top;
    if (phi_top > kPhiCut) {
      double lo = 1e-9, hi = u_top;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < kPhiCut ? lo : hi) = mid;
      }
      u_max = hi;
      phi_top = kPhiCut;
    }
    knots_.resize(kCells + 1);
    phis_.resize(kCells + 1);
    knots_[0] = 0.0;
    phis_[0] = 0.0;
    for (int i = 1; i <= kCells; ++i) {
      const double target = phi_top * i / kCells;
      double lo = knots_[i - 1], hi = u_max;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < target ? lo : hi) = mid;
      }
      knots_[i] = hi;
      phis_[i] = target;
    }
    cum_.resize(kCells);
    double acc = 0.0;
    for (int i = 0; i < kCells; ++i) {
      acc += std::exp(-phis_[i]) * (knots_[i + 1] - knots_[i]);
      cum_[i] = acc;
    }
    for (double& c : cum_) c /= acc;
  }

  double draw(Rng& rng) const {
    double u;
    if (delta_ == 0.0) {
      u = rng.uniform(0.0, kPi);
    } else {
      for (;;) {
        const auto it =
            std::lower_bound(cum_.begin(), cum_.end(), rng.uniform());
        const auto c = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(it - cum_.begin(), kCells - 1));
        u = rng.uniform(knots_[c], knots_[c + 1]);
        if (std::log(rng.uniform()) < -(phi(u) - phis_[c])) break;
      }
    }
    const double y = rng.gamma(delta_ + 1.0) * std::exp(-log_a(u));
    return std::pow(y, 1.0 - sigma_);
  }

 private:
  static constexpr int kCells = 1024;
  static constexpr double kPhiCut = 46.0;

  double log_a(double u) const {
    u = std::max(u, 1e-12);
    return (sigma_ * std::log(std::sin(sigma_ * u)) +
            (1.0 - sigma_) * std::log(std::sin((1.0 - sigma_) * u)) -
            std::log(std::sin(u))) /
           (1.0 - sigma_);
  }
  double phi(double u) const { return delta_ * (log_a(u) - log_a0_); }

  double sigma_;
  double delta_;
  double log_a0_;
  std::vector<double> knots_;
  std::vector<double> phis_;
  std::vector<double> cum_;
};

// Law of total probability over the latent component count m: each
// conditional finite-Dirichlet pmf uses V^(m)_{n,k} =
// s^{k-1} (m-1)!/(m-k)! / (m s + 1)_{n-1} with s = |sigma|.
void mixed_kn_pmf(const GibbsModel& model, std::int64_t n,
                  std::vector<double>& pmf) {
  const double s = model.abs_sigma();
  const MixingPMF& pi = model.mixing();
  const double log_tol = std::log(model.truncation_tol());
  const auto lw = log_scaled_coeff_row(n, -s, 0.0);
  for (std::int64_t m = 1; m <= kMaxMixingTerms; ++m) {
    const double lpi = pi.log_pmf(m);
    if (lpi != neg_inf) {
      const double w = std::exp(lpi);
      const double l_denom =
          std::lgamma(m * s + n) - std::lgamma(m * s + 1.0);
      for (std::int64_t k = 1; k <= std::min(n, m); ++k) {
        const double lv = (k - 1) * std::log(s) + std::lgamma(double(m)) -
                          std::lgamma(double(m - k + 1)) - l_denom;
        pmf[static_cast<std::size_t>(k - 1)] +=
            w * std::exp(lv + lw[static_cast<std::size_t>(k)]);
      }
    }
    if (pi.log_survival(m) <= log_tol) return;
  }
  throw NumericError(
      "prior_Kn_pmf: mixing tail cannot reach the truncation tolerance; "
      "raise truncation_tol");
}

}  // namespace

double KnDistribution::prob(std::int64_t k) const {
  if (k < 1 || k > n) return 0.0;
  return pmf[static_cast<std::size_t>(k - 1)];
}

double KnDistribution::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i)
    s += static_cast<double>(i + 1) * pmf[i];
  return s;
}

double KnDistribution::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double d = static_cast<double>(i + 1) - m;
    s += d * d * pmf[i];
  }
  return s;
}

KnDistribution prior_Kn_pmf(const GibbsModel& model, std::int64_t n) {
  if (n < 1) throw DomainError("prior_Kn_pmf: n must be >= 1");
  std::vector<double> pmf(static_cast<std::size_t>(n), 0.0);
  if (model.family() == Family::MixedFiniteDirichlet) {
    mixed_kn_pmf(model, n, pmf);
  } else {
    const auto lw = log_scaled_coeff_row(n, model.sigma(), 0.0);
    const auto lv = log_V_row(model, n, 1, n);
    for (std::int64_t k = 1; k <= n; ++k) {
      const double l = lv[static_cast<std::size_t>(k - 1)] +
                       lw[static_cast<std::size_t>(k)];
      pmf[static_cast<std::size_t>(k - 1)] =
          std::isfinite(l) ? std::exp(l) : 0.0;
    }
  }
  return KnDistribution{n, model, std::move(pmf)};
}

double expected_Kn(const GibbsModel& model, std::int64_t n) {
  return prior_Kn_pmf(model, n).mean();
}

GibbsModel elicit(Family family, double sigma, std::int64_t n,
                  double target_mean) {
  if (n < 1) throw DomainError("elicit: n must be >= 1");
  if (!(target_mean > 1.0 && target_mean < static_cast<double>(n)))
    throw DomainError("elicit: target mean must lie strictly between 1 and n");
  std::function<GibbsModel(double)> make;
  double lo = 0.0;
  switch (family) {
    case Family::Dirichlet:
      if (sigma != 0.0)
        throw DomainError("elicit: Dirichlet requires sigma = 0");
      make = [](double x) { return GibbsModel::dirichlet(x); };
      lo = 1e-10;
      break;
    case Family::PitmanYor:
      if (!(sigma >= 0.0 && sigma < 1.0))
        throw DomainError("elicit: Pitman-Yor elicitation needs sigma in [0,1)");
      make = [sigma](double x) { return GibbsModel::pitman_yor(sigma, x); };
      lo = sigma > 0.0 ? -sigma + 1e-9 : 1e-10;
      break;
    case Family::NGG:
      if (!(sigma > 0.0 && sigma < 1.0))
        throw DomainError("elicit: NGG elicitation needs sigma in (0,1)");
      make = [sigma](double x) { return GibbsModel::ngg(sigma, x); };
      lo = 1e-10;
      break;
    default:
      throw DomainError(
          "elicit: family has no free location parameter to solve for");
  }
  const double tol = 1e-4 * target_mean;
  const auto value = [&](double x) { return expected_Kn(make(x), n); };
  double f_lo = value(lo);
  if (std::abs(f_lo - target_mean) <= tol) return make(lo);
  if (f_lo > target_mean)
    throw NumericError(
        "elicit: target mean is below the reachable range at this sigma");
  double hi = std::max(1.0, 2.0 * std::abs(lo));
  while (value(hi) < target_mean) {
    hi *= 2.0;
    if (hi > 1e12)
      throw NumericError("elicit: no parameter value reaches the target mean");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = value(mid);
    if (std::abs(f_mid - target_mean) <= tol) return make(mid);
    (f_mid < target_mean ? lo : hi) = mid;
  }
  throw NumericError("elicit: bisection failed to reach the tolerance");
}

double cn_rate(double sigma, std::int64_t n) {
  if (n < 1) throw DomainError("cn_rate: n must be >= 1");
  if (sigma >= 1.0) throw DomainError("cn_rate: sigma must be < 1");
  if (sigma < 0.0) return 1.0;
  if (sigma == 0.0) return std::log(static_cast<double>(n));
  return std::pow(static_cast<double>(n), sigma);
}

DiversityLimitLaw::DiversityLimitLaw(double sigma_in, double theta_in,
                                     std::int64_t n_in, std::int64_t k_in)
    : sigma(sigma_in), theta(theta_in), n(n_in), k(k_in) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw DomainError("diversity limit law: sigma must lie in (0,1)");
  if (n < 1 || k < 1 || k > n)
    throw DomainError("diversity limit law: need 1 <= k <= n");
  if (!(static_cast<double>(k) + theta / sigma > 0.0) ||
      !(static_cast<double>(n) / sigma - static_cast<double>(k) > 0.0))
    throw DomainError("diversity limit law: beta shapes must be positive");
}

double DiversityLimitLaw::moment(int p) const {
  if (p < 0) throw DomainError("moment: order must be >= 0");
  const double a = static_cast<double>(k) + theta / sigma;
  return std::exp(std::lgamma(a + p) - std::lgamma(a) +
                  std::lgamma(theta + static_cast<double>(n)) -
                  std::lgamma(theta + static_cast<double>(n) + p * sigma));
}

double DiversityLimitLaw::variance() const {
  const double m1 = moment(1);
  return moment(2) - m1 * m1;
}

std::vector<double> sample_Znk(const DiversityLimitLaw& law, Rng& rng,
                               std::int64_t draws) {
  if (draws < 1) throw DomainError("sample_Znk: draws must be >= 1");
  const double a = static_cast<double>(law.k) + law.theta / law.sigma;
  const double b =
      static_cast<double>(law.n) / law.sigma - static_cast<double>(law.k);
  const TiltedUSampler u_sampler(law.sigma,
                                 (law.theta + static_cast<double>(law.n)) /
                                     law.sigma);
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (double& z : out) z = rng.beta(a, b) * u_sampler.draw(rng);
  return out;
}

std::vector<double> sample_S_sigma(double sigma, double theta, Rng& rng,
                                   std::int64_t draws) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw DomainError("sample_S_sigma: sigma must lie in (0,1)");
  if (theta < 0.0)
    throw DomainError("sample_S_sigma: tilt theta must be >= 0");
  if (draws < 1) throw DomainError("sample_S_sigma: draws must be >= 1");
  const TiltedUSampler u_sampler(sigma, theta / sigma);
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (double& s : out) s = u_sampler.draw(rng);
  return out;
}

std::pair<double, double> asymptotic_credible_interval_Km(
    const GibbsModel& model, const Partition& p, std::int64_t m, double level,
    Rng& rng, std::int64_t draws) {
  if (model.family() != Family::PitmanYor || !(model.sigma() > 0.0))
    throw DomainError(
        "asymptotic_credible_interval_Km: needs Pitman-Yor with sigma > 0");
  if (!(level >= 0.0 && level < 1.0))
    throw DomainError("asymptotic_credible_interval_Km: level must lie in [0,1)");
  if (m < 1) throw DomainError("asymptotic_credible_interval_Km: m must be >= 1");
  p.validate();
  const DiversityLimitLaw law(model.sigma(), model.theta(), p.n, p.k());
  auto z = sample_Znk(law, rng, draws);
  std::sort(z.begin(), z.end());
  const double scale = std::pow(static_cast<double>(m), model.sigma());
  const auto quantile = [&](double q) {
    const auto last = static_cast<double>(z.size() - 1);
    const auto i = static_cast<std::size_t>(
        std::min(last, std::max(0.0, q * static_cast<double>(z.size()))));
    return z[i];
  };
  return {scale * quantile(0.5 * (1.0 - level)),
          scale * quantile(0.5 * (1.0 + level))};
}

}  // namespace gibbs
