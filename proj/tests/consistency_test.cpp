#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "gibbs/consistency.hpp"
#include "gibbs/errors.hpp"
#include "gibbs/models.hpp"
#include "gibbs/rng.hpp"

using namespace gibbs;

namespace {

double final_ratio(const std::vector<TrajectoryPoint>& traj) {
  REQUIRE(!traj.empty());
  return traj.back().ratio;
}

double mean_final_ratio(const GibbsModel& model, const TruthRegime& regime,
                        std::int64_t n_max, std::uint64_t seed,
                        int n_seeds) {
  double acc = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(s)));
    acc += final_ratio(alpha_trajectory(model, regime, n_max, rng));
  }
  return acc / n_seeds;
}

}  // namespace

TEST_CASE("truth regimes validate their parameters") {
  CHECK_THROWS_AS(TruthRegime::discrete_uniform(0), DataError);
  CHECK_THROWS_AS(TruthRegime::discrete_geometric(0.0), DataError);
  CHECK_THROWS_AS(TruthRegime::discrete_geometric(1.0), DataError);
  const auto u = TruthRegime::discrete_uniform(5);
  CHECK(u.kind() == TruthRegime::Kind::DiscreteUniform);
  CHECK(u.n_symbols() == 5);
  CHECK_THROWS_AS(u.q(), DomainError);
  const auto g = TruthRegime::discrete_geometric(0.25);
  CHECK(g.q() == 0.25);
  CHECK_THROWS_AS(g.n_symbols(), DomainError);
  CHECK(TruthRegime::diffuse().name() == "diffuse");
  CHECK(u.name() == "discrete_uniform(5)");
}

TEST_CASE("trajectory grid covers 1..10 then log-spaced points to n_max") {
  Rng rng(1);
  const auto model = GibbsModel::dirichlet(1.0);
  const auto small =
      alpha_trajectory(model, TruthRegime::diffuse(), 10, rng);
  REQUIRE(small.size() == 10);
  for (std::int64_t n = 1; n <= 10; ++n) {
    CHECK(small[static_cast<std::size_t>(n - 1)].n == n);
    CHECK(small[static_cast<std::size_t>(n - 1)].kappa == n);
  }
  const auto big =
      alpha_trajectory(model, TruthRegime::diffuse(), 10000, rng);
  CHECK(big.front().n == 1);
  CHECK(big.back().n == 10000);
  for (std::size_t i = 1; i < big.size(); ++i)
    CHECK(big[i].n > big[i - 1].n);
  CHECK(big.size() >= 60);
  CHECK(big.size() <= 100);
  CHECK_THROWS_AS(alpha_trajectory(model, TruthRegime::diffuse(), 9, rng),
                  DataError);
}

TEST_CASE("diffuse trajectories match the closed-form prediction weights") {
  Rng rng(2);
  // Gnedin: ratio = kappa (kappa - gamma) / (n (gamma + n)) at kappa = n
  const auto gn = alpha_trajectory(GibbsModel::gnedin(0.5),
                                   TruthRegime::diffuse(), 10000, rng);
  for (const auto& pt : gn) {
    const double n = static_cast<double>(pt.n);
    const double want = n * (n - 0.5) / (n * (0.5 + n));
    CHECK(pt.ratio == doctest::Approx(want).epsilon(1e-9));
  }
  // PitmanYor: ratio = (theta + sigma n) / (theta + n)
  const auto py = alpha_trajectory(GibbsModel::pitman_yor(0.25, 1.0),
                                   TruthRegime::diffuse(), 10000, rng);
  for (const auto& pt : py) {
    const double n = static_cast<double>(pt.n);
    CHECK(pt.ratio == doctest::Approx((1.0 + 0.25 * n) / (1.0 + n))
                          .epsilon(1e-12));
  }
}

TEST_CASE("diffuse limits: every cataloged model converges within 0.02") {
  const std::vector<GibbsModel> models = {
      GibbsModel::dirichlet(19.233),
      GibbsModel::pitman_yor(0.25, 1.0),
      GibbsModel::pitman_yor(0.0, 3.0),
      GibbsModel::ngg(0.25, 48.4185),
      GibbsModel::ngg(0.7353, 1.0),
      GibbsModel::gnedin(0.5),
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::poisson(4.0)),
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::geometric(0.5)),
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::gnedin(0.3)),
  };
  Rng rng(3);
  for (const auto& model : models) {
    const auto alpha = alpha_theoretical(model, TruthRegime::diffuse());
    REQUIRE(alpha.has_value());
    const double got =
        final_ratio(alpha_trajectory(model, TruthRegime::diffuse(), 10000, rng));
    CHECK(std::fabs(got - *alpha) <= 0.02);
  }

  // tight checks where the limit is approached fast
  Rng r2(4);
  CHECK(std::fabs(final_ratio(alpha_trajectory(
                      GibbsModel::ngg(0.7353, 1.0), TruthRegime::diffuse(),
                      10000, r2)) -
                  0.7353) <= 1e-5);
  CHECK(std::fabs(final_ratio(alpha_trajectory(
                      GibbsModel::mixed_finite_dirichlet(
                          1.0, MixingPMF::geometric(0.5)),
                      TruthRegime::diffuse(), 10000, r2)) -
                  0.17157287525381) <= 1e-4);
}

TEST_CASE("theoretical limit catalog") {
  const auto diffuse = TruthRegime::diffuse();
  CHECK(*alpha_theoretical(GibbsModel::dirichlet(7.0), diffuse) == 0.0);
  CHECK(*alpha_theoretical(GibbsModel::pitman_yor(0.25, 1.0), diffuse) ==
        0.25);
  CHECK(*alpha_theoretical(GibbsModel::pitman_yor(0.0, 1.0), diffuse) == 0.0);
  CHECK(!alpha_theoretical(GibbsModel::pitman_yor(-0.5, 2.5), diffuse));
  CHECK(*alpha_theoretical(GibbsModel::ngg(0.7353, 1.0), diffuse) == 0.7353);
  CHECK(*alpha_theoretical(GibbsModel::gnedin(0.5), diffuse) == 1.0);
  CHECK(*alpha_theoretical(GibbsModel::mixed_finite_dirichlet(
                               1.0, MixingPMF::poisson(3.0)),
                           diffuse) == 0.0);
  CHECK(*alpha_theoretical(GibbsModel::mixed_finite_dirichlet(
                               1.0, MixingPMF::gnedin(0.3)),
                           diffuse) == 1.0);
  CHECK(!alpha_theoretical(GibbsModel::mixed_finite_dirichlet(
                               0.5, MixingPMF::geometric(0.5)),
                           diffuse));
  CHECK(!alpha_theoretical(GibbsModel::mixed_finite_dirichlet(
                               1.0, MixingPMF::explicit_weights(
                                        {0.25, 0.25, 0.25, 0.25})),
                           diffuse));

  const double a_half = *alpha_theoretical(
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::geometric(0.5)),
      diffuse);
  CHECK(a_half == doctest::Approx(0.171573).epsilon(1e-5));

  // boundary limits of the geometric-mixing formula
  CHECK(*alpha_theoretical(GibbsModel::mixed_finite_dirichlet(
                               1.0, MixingPMF::geometric(1e-6)),
                           diffuse) <= 1e-6);
  CHECK(*alpha_theoretical(GibbsModel::mixed_finite_dirichlet(
                               1.0, MixingPMF::geometric(1.0 - 1e-6)),
                           diffuse) >= 0.99);

  // strictly increasing in eta on a 99-point grid
  double prev = -1.0;
  for (int i = 1; i <= 99; ++i) {
    const double a = *alpha_theoretical(
        GibbsModel::mixed_finite_dirichlet(
            1.0, MixingPMF::geometric(static_cast<double>(i) / 100.0)),
        diffuse);
    CHECK(a > prev);
    prev = a;
  }

  // discrete truths: 0 whenever the model can track the support
  const auto uni5 = TruthRegime::discrete_uniform(5);
  const auto geo = TruthRegime::discrete_geometric(0.5);
  CHECK(*alpha_theoretical(GibbsModel::dirichlet(7.0), uni5) == 0.0);
  CHECK(*alpha_theoretical(GibbsModel::gnedin(0.5), geo) == 0.0);
  CHECK(*alpha_theoretical(GibbsModel::pitman_yor(-0.5, 2.5), uni5) == 0.0);
  CHECK(!alpha_theoretical(GibbsModel::pitman_yor(-0.5, 2.5),
                           TruthRegime::discrete_uniform(6)));
  CHECK(!alpha_theoretical(GibbsModel::pitman_yor(-0.5, 2.5), geo));
}

TEST_CASE("discrete truths drive the new-value probability to zero") {
  const auto uni5 = TruthRegime::discrete_uniform(5);
  const auto geo = TruthRegime::discrete_geometric(0.5);
  const std::vector<GibbsModel> models = {
      GibbsModel::dirichlet(1.0),
      GibbsModel::pitman_yor(0.25, 1.0),
      GibbsModel::ngg(0.5, 1.0),
      GibbsModel::gnedin(0.5),
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::poisson(4.0)),
      GibbsModel::pitman_yor(-0.5, 2.5),
  };
  for (const auto& model : models)
    CHECK(std::fabs(mean_final_ratio(model, uni5, 10000, 101, 20)) <= 0.02);
  for (const auto& model :
       {GibbsModel::dirichlet(1.0), GibbsModel::pitman_yor(0.25, 1.0),
        GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::geometric(0.5))})
    CHECK(std::fabs(mean_final_ratio(model, geo, 10000, 202, 20)) <= 0.02);
}

TEST_CASE("discrete kappa paths are sane and reproducible") {
  const auto model = GibbsModel::pitman_yor(0.25, 1.0);
  const auto uni5 = TruthRegime::discrete_uniform(5);
  Rng a(9), b(9), c(10);
  const auto ta = alpha_trajectory(model, uni5, 10000, a);
  const auto tb = alpha_trajectory(model, uni5, 10000, b);
  const auto tc = alpha_trajectory(model, uni5, 10000, c);
  REQUIRE(ta.size() == tb.size());
  bool same_as_c = ta.size() == tc.size();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].kappa == tb[i].kappa);
    CHECK(ta[i].ratio == tb[i].ratio);
    if (same_as_c && ta[i].kappa != tc[i].kappa) same_as_c = false;
  }
  CHECK(!same_as_c);
  CHECK(ta.front().kappa == 1);
  for (std::size_t i = 1; i < ta.size(); ++i) {
    CHECK(ta[i].kappa >= ta[i - 1].kappa);
    CHECK(ta[i].kappa <= 5);
  }
  CHECK(ta.back().kappa == 5);

  const auto geo = TruthRegime::discrete_geometric(0.5);
  for (int s = 0; s < 20; ++s) {
    Rng rng(Rng::derive(33, static_cast<std::uint64_t>(s)));
    const auto t = alpha_trajectory(model, geo, 10000, rng);
    CHECK(t.back().kappa >= 8);
    CHECK(t.back().kappa <= 30);
  }
}

TEST_CASE("cluster caps surface as NaN once the path leaves the support") {
  Rng rng(5);
  const auto model = GibbsModel::pitman_yor(-1.0, 5.0);  // five components
  const auto traj =
      alpha_trajectory(model, TruthRegime::diffuse(), 12, rng);
  for (const auto& pt : traj) {
    if (pt.n < 5) {
      CHECK(pt.ratio > 0.0);
    } else if (pt.n == 5) {
      CHECK(pt.ratio == 0.0);
    } else {
      CHECK(std::isnan(pt.ratio));
    }
  }
}

TEST_CASE("trajectory ratio equals the predictive new-mass identically") {
  const std::vector<GibbsModel> models = {
      GibbsModel::dirichlet(19.233),
      GibbsModel::pitman_yor(0.25, 1.0),
      GibbsModel::gnedin(0.5),
      GibbsModel::ngg(0.5, 2.0),
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::poisson(4.0)),
  };
  for (const auto& model : models) {
    Rng rng(6);
    const auto traj =
        alpha_trajectory(model, TruthRegime::diffuse(), 100, rng);
    for (const auto& pt : traj) {
      const double via_v =
          std::exp(log_V(model, pt.n + 1, pt.kappa + 1) -
                   log_V(model, pt.n, pt.kappa));
      CHECK(pt.ratio == doctest::Approx(via_v).epsilon(1e-12));
      const Partition singles = Partition::from_sizes(
          std::vector<std::int64_t>(static_cast<std::size_t>(pt.n), 1));
      CHECK(predictive_weights(model, singles)[0] ==
            doctest::Approx(pt.ratio).epsilon(1e-12));
    }
    // same identity along a simulated discrete path
    Rng r2(7);
    const auto disc = alpha_trajectory(
        model, TruthRegime::discrete_uniform(5), 100, r2);
    for (const auto& pt : disc) {
      std::vector<std::int64_t> sizes(static_cast<std::size_t>(pt.kappa), 1);
      sizes[0] = pt.n - pt.kappa + 1;
      CHECK(predictive_weights(model, Partition::from_sizes(sizes))[0] ==
            doctest::Approx(pt.ratio).epsilon(1e-12));
    }
  }
}

TEST_CASE("tail condition reports for the cataloged mixing families") {
  const auto poi = check_tail_conditions(MixingPMF::poisson(4.0), 200);
  CHECK(poi.m_max == 200);
  for (std::int64_t m = 1; m <= 200; ++m)
    CHECK(poi.ratio[static_cast<std::size_t>(m - 1)] ==
          doctest::Approx(4.0 / static_cast<double>(m + 1)).epsilon(1e-12));
  CHECK(poi.t1_holds);
  CHECK(poi.t1_from == 3);  // 4/(m+1) <= 1 from m = 3 on
  CHECK(poi.t2_holds);
  CHECK(poi.t2_constant > 3.9);
  CHECK(poi.t2_constant <= 4.0);

  const auto geo = check_tail_conditions(MixingPMF::geometric(0.5), 500);
  for (const double r : geo.ratio) CHECK(r == doctest::Approx(0.5));
  CHECK(geo.t1_holds);
  CHECK(geo.t1_from == 1);
  CHECK(!geo.t2_holds);
  CHECK(geo.t2_constant == doctest::Approx(250.0).epsilon(1e-9));

  const auto gn = check_tail_conditions(MixingPMF::gnedin(0.3), 500);
  for (std::int64_t m = 1; m <= 500; ++m)
    CHECK(gn.ratio[static_cast<std::size_t>(m - 1)] ==
          doctest::Approx((static_cast<double>(m) - 0.3) /
                          static_cast<double>(m + 1))
              .epsilon(1e-12));
  CHECK(gn.t1_holds);
  CHECK(gn.t1_from == 1);
  CHECK(!gn.t2_holds);

  const auto fin = check_tail_conditions(
      MixingPMF::explicit_weights({0.4, 0.3, 0.2, 0.1}), 20);
  CHECK(fin.t1_holds);
  CHECK(fin.t2_holds);  // finite support: both conditions vacuously true
  CHECK(fin.ratio[0] == doctest::Approx(0.75));
  CHECK(fin.ratio[4] == 0.0);

  // a gap in the support produces an infinite ratio and fails T2's
  // window only if the gap falls in it
  const auto gap = check_tail_conditions(
      MixingPMF::explicit_weights({0.5, 0.0, 0.5}), 12);
  CHECK(gap.ratio[0] == 0.0);
  CHECK(std::isinf(gap.ratio[1]));
  CHECK(gap.t1_from == 3);
  CHECK(gap.t1_holds);
  CHECK(gap.t2_holds);

  CHECK_THROWS_AS(check_tail_conditions(MixingPMF::poisson(1.0), 9),
                  DataError);
}
