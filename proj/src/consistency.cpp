#include "gibbs/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbs/errors.hpp"

namespace gibbs {

namespace {

// every n up to 10, then ~20 points per decade, n_max always last
std::vector<std::int64_t> report_grid(std::int64_t n_max) {
  std::vector<std::int64_t> grid;
  for (std::int64_t n = 1; n <= std::min<std::int64_t>(10, n_max); ++n)
    grid.push_back(n);
  const double step = std::pow(10.0, 0.05);
  for (double x = 10.0 * step;; x *= step) {
    const auto n = static_cast<std::int64_t>(std::llround(x));
    if (n >= n_max) break;
    if (n > grid.back()) grid.push_back(n);
  }
  if (grid.back() != n_max) grid.push_back(n_max);
  return grid;
}

}  // namespace

TruthRegime TruthRegime::diffuse() { return {Kind::Diffuse, 0, 0.0}; }

TruthRegime TruthRegime::discrete_uniform(std::int64_t n_symbols) {
  if (n_symbols < 1)
    throw DataError("discrete_uniform: need at least one symbol");
  return {Kind::DiscreteUniform, n_symbols, 0.0};
}

TruthRegime TruthRegime::discrete_geometric(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw DataError("discrete_geometric: q must lie in (0,1)");
  return {Kind::DiscreteGeometric, 0, q};
}

std::int64_t TruthRegime::n_symbols() const {
  if (kind_ != Kind::DiscreteUniform)
    throw DomainError("n_symbols: not a discrete_uniform regime");
  return n_symbols_;
}

double TruthRegime::q() const {
  if (kind_ != Kind::DiscreteGeometric)
    throw DomainError("q: not a discrete_geometric regime");
  return q_;
}

std::string TruthRegime::name() const {
  switch (kind_) {
    case Kind::Diffuse:
      return "diffuse";
    case Kind::DiscreteUniform:
      return "discrete_uniform(" + std::to_string(n_symbols_) + ")";
    case Kind::DiscreteGeometric:
      return "discrete_geometric(" + std::to_string(q_) + ")";
  }
  return "?";
}

std::vector<TrajectoryPoint> alpha_trajectory(const GibbsModel& model,
                                              const TruthRegime& regime,
                                              std::int64_t n_max, Rng& rng) {
  if (n_max < 10) throw DataError("alpha_trajectory: n_max must be >= 10");
  const auto grid = report_grid(n_max);
  const std::int64_t cap = model.max_clusters();
  // The unit-discount gnedin mixture is the gnedin family in another
  // notation; the generic mixture sum cannot reach kappa ~ n against the
  // heavy gnedin tail, so evaluate through the closed form.
  std::optional<GibbsModel> substitute;
  if (model.family() == Family::MixedFiniteDirichlet &&
      model.abs_sigma() == 1.0 &&
      model.mixing().kind() == MixingPMF::Kind::Gnedin)
    substitute = GibbsModel::gnedin(model.mixing().param());
  const GibbsModel& eval_model = substitute ? *substitute : model;
  std::vector<TrajectoryPoint> out;
  out.reserve(grid.size());
  auto emit = [&](std::int64_t n, std::int64_t kappa) {
    const double ratio = (cap >= 0 && kappa > cap)
                             ? std::numeric_limits<double>::quiet_NaN()
                             : prob_new(eval_model, n, kappa);
    out.push_back({n, kappa, ratio});
  };

  if (regime.kind() == TruthRegime::Kind::Diffuse) {
    for (const std::int64_t n : grid) emit(n, n);
    return out;
  }

  std::vector<char> seen;
  std::int64_t kappa = 0;
  std::size_t gi = 0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    std::int64_t x;
    if (regime.kind() == TruthRegime::Kind::DiscreteUniform) {
      x = rng.uniform_int(regime.n_symbols()) + 1;
    } else {
      x = 1 + static_cast<std::int64_t>(
                  std::floor(std::log(rng.uniform()) / std::log(regime.q())));
    }
    if (x >= static_cast<std::int64_t>(seen.size()))
      seen.resize(static_cast<std::size_t>(x) + 1, 0);
    if (!seen[static_cast<std::size_t>(x)]) {
      seen[static_cast<std::size_t>(x)] = 1;
      ++kappa;
    }
    if (gi < grid.size() && grid[gi] == n) {
      emit(n, kappa);
      ++gi;
    }
  }
  return out;
}

std::optional<double> alpha_theoretical(const GibbsModel& model,
                                        const TruthRegime& regime) {
  const std::int64_t cap = model.max_clusters();
  if (regime.kind() != TruthRegime::Kind::Diffuse) {
    if (cap >= 0) {
      // a capped model can only track a truth whose support fits the cap
      if (regime.kind() == TruthRegime::Kind::DiscreteGeometric ||
          regime.n_symbols() > cap)
        return std::nullopt;
    }
    return 0.0;
  }
  switch (model.family()) {
    case Family::Dirichlet:
      return 0.0;
    case Family::PitmanYor:
      if (model.sigma() < 0.0) return std::nullopt;
      return model.sigma();
    case Family::NGG:
      return model.sigma();
    case Family::Gnedin:
      return 1.0;
    case Family::MixedFiniteDirichlet: {
      if (model.abs_sigma() != 1.0) return std::nullopt;
      const auto& pi = model.mixing();
      switch (pi.kind()) {
        case MixingPMF::Kind::Poisson:
          return 0.0;
        case MixingPMF::Kind::Geometric: {
          // stable form of (2 - eta - 2 sqrt(1-eta)) / eta
          const double eta = pi.param();
          const double s = 1.0 + std::sqrt(1.0 - eta);
          return eta / (s * s);
        }
        case MixingPMF::Kind::Gnedin:
          return 1.0;
        case MixingPMF::Kind::Explicit:
          return std::nullopt;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

TailConditionReport check_tail_conditions(const MixingPMF& mixing,
                                          std::int64_t m_max) {
  if (m_max < 10)
    throw DataError("check_tail_conditions: m_max must be >= 10");
  TailConditionReport rep;
  rep.m_max = m_max;
  rep.ratio.resize(static_cast<std::size_t>(m_max));
  for (std::int64_t m = 1; m <= m_max; ++m) {
    const double la = mixing.log_pmf(m);
    const double lb = mixing.log_pmf(m + 1);
    double r;
    if (lb == neg_inf)
      r = 0.0;
    else if (la == neg_inf)
      r = std::numeric_limits<double>::infinity();
    else
      r = std::exp(lb - la);
    rep.ratio[static_cast<std::size_t>(m - 1)] = r;
  }

  std::int64_t from = -1;
  for (std::int64_t m = m_max; m >= 1; --m) {
    if (rep.ratio[static_cast<std::size_t>(m - 1)] <= 1.0 + 1e-12)
      from = m;
    else
      break;
  }
  rep.t1_from = from;
  rep.t1_holds = from >= 1 && from <= m_max - m_max / 4 + 1;

  const std::int64_t mid = std::max<std::int64_t>(1, m_max / 2);
  double best = 0.0;
  for (std::int64_t m = mid; m <= m_max; ++m)
    best = std::max(best, static_cast<double>(m) *
                              rep.ratio[static_cast<std::size_t>(m - 1)]);
  rep.t2_constant = best;
  const double s_mid =
      static_cast<double>(mid) * rep.ratio[static_cast<std::size_t>(mid - 1)];
  const double s_end = static_cast<double>(m_max) *
                       rep.ratio[static_cast<std::size_t>(m_max - 1)];
  rep.t2_holds = std::isfinite(best) && s_end <= 1.25 * s_mid + 1e-12;
  return rep;
}

}  // namespace gibbs
