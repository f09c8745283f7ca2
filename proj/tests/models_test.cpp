#include "gibbs/models.hpp"

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "gibbs/combinatorics.hpp"
#include "gibbs/errors.hpp"
#include "oracles.hpp"

using gibbs::GibbsModel;
using gibbs::MixingPMF;
using gibbs::Partition;
using oracle::Rat;

namespace {

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

// Exact partition probability oracles, rational all the way.
Rat eppf_dirichlet_exact(const Rat& theta, const std::vector<std::int64_t>& s) {
  std::int64_t n = 0;
  for (auto x : s) n += x;
  Rat acc = 1;
  for (std::size_t i = 0; i < s.size(); ++i) acc *= theta;
  for (auto x : s) acc *= Rat(oracle::factorial(x - 1));
  return acc / oracle::rising(theta, n);
}

Rat eppf_py_exact(const Rat& sigma, const Rat& theta,
                  const std::vector<std::int64_t>& s) {
  std::int64_t n = 0;
  for (auto x : s) n += x;
  const auto k = static_cast<std::int64_t>(s.size());
  Rat v = 1;
  for (std::int64_t i = 1; i < k; ++i) v *= theta + Rat(i) * sigma;
  v /= oracle::rising(theta + 1, n - 1);
  for (auto x : s) v *= oracle::rising(1 - sigma, x - 1);
  return v;
}

Rat V_py_neg_exact(std::int64_t n, std::int64_t k, const Rat& abs_sigma,
                   std::int64_t m) {
  if (k > m) return 0;
  Rat v = 1;
  for (std::int64_t i = 1; i < k; ++i) v *= abs_sigma * Rat(m - i);
  return v / oracle::rising(Rat(m) * abs_sigma + 1, n - 1);
}

Rat V_gnedin_exact(std::int64_t n, std::int64_t k, const Rat& g) {
  return Rat(oracle::factorial(k - 1)) * oracle::rising(1 - g, k - 1) *
         oracle::rising(g, n - k) /
         (Rat(oracle::factorial(n - 1)) * oracle::rising(1 + g, n - 1));
}

Rat V_mfd_explicit_exact(std::int64_t n, std::int64_t k, const Rat& s,
                         const std::vector<Rat>& pi) {
  Rat acc = 0;
  for (std::int64_t m = k; m <= static_cast<std::int64_t>(pi.size()); ++m) {
    Rat term = pi[static_cast<std::size_t>(m - 1)];
    for (std::int64_t i = 1; i < k; ++i) term *= s * Rat(m - i);
    term /= oracle::rising(Rat(m) * s + 1, n - 1);
    acc += term;
  }
  return acc;
}

std::vector<GibbsModel> model_matrix() {
  return {
      GibbsModel::dirichlet(1.0),
      GibbsModel::dirichlet(19.233),
      GibbsModel::pitman_yor(0.5, 1.0),
      GibbsModel::pitman_yor(0.25, 12.2157),
      GibbsModel::pitman_yor(0.0, 2.0),
      GibbsModel::pitman_yor(-0.5, 2.5),  // five components
      GibbsModel::ngg(0.25, 48.4185),
      GibbsModel::ngg(0.7353, 1.0),
      GibbsModel::gnedin(0.5),
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::poisson(4.0)),
      GibbsModel::mixed_finite_dirichlet(0.5, MixingPMF::geometric(0.5)),
      GibbsModel::mixed_finite_dirichlet(
          0.5, MixingPMF::explicit_weights({0.25, 0.25, 0.5})),
  };
}

}  // namespace

TEST_CASE("partition type: construction and validation") {
  const auto p = Partition::from_labels({3, 1, 3, 7, 1, 1});
  CHECK(p.n == 6);
  CHECK(p.k() == 3);
  std::vector<std::int64_t> sorted = p.sizes;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::int64_t>{1, 2, 3});
  CHECK_THROWS_AS(Partition::from_sizes({2, 0, 1}), gibbs::DataError);
  CHECK_THROWS_AS(Partition::from_sizes({}), gibbs::DataError);
}

TEST_CASE("dirichlet partition probabilities against exact rationals") {
  const Rat theta(3, 2);
  const auto model = GibbsModel::dirichlet(1.5);
  for (std::int64_t n = 1; n <= 9; ++n) {
    for (const auto& cls : oracle::partition_classes(n)) {
      const auto p = Partition::from_sizes(cls.sizes);
      const double want =
          oracle::to_signed_log(eppf_dirichlet_exact(theta, cls.sizes))
              .log_mag;
      CHECK(std::fabs(gibbs::log_eppf(model, p) - want) <
            1e-12 * std::max(1.0, std::fabs(want)));
      CHECK(std::fabs(gibbs::log_eppf_dirichlet_closed(1.5, p) - want) <
            1e-12 * std::max(1.0, std::fabs(want)));
    }
  }
}

TEST_CASE("pitman-yor partition probabilities against exact rationals") {
  const Rat sigma(1, 2), theta(1);
  const auto model = GibbsModel::pitman_yor(0.5, 1.0);
  for (std::int64_t n = 1; n <= 9; ++n) {
    for (const auto& cls : oracle::partition_classes(n)) {
      const auto p = Partition::from_sizes(cls.sizes);
      const double want =
          oracle::to_signed_log(eppf_py_exact(sigma, theta, cls.sizes))
              .log_mag;
      CHECK(std::fabs(gibbs::log_eppf(model, p) - want) <
            1e-12 * std::max(1.0, std::fabs(want)));
      CHECK(std::fabs(gibbs::log_eppf_pitman_yor_closed(0.5, 1.0, p) - want) <
            1e-12 * std::max(1.0, std::fabs(want)));
    }
  }
}

TEST_CASE("bounded pitman-yor V weights against exact rationals") {
  const auto model = GibbsModel::pitman_yor(-0.5, 2.5);
  CHECK(model.max_clusters() == 5);
  for (std::int64_t n = 1; n <= 9; ++n)
    for (std::int64_t k = 1; k <= n; ++k) {
      const Rat v = V_py_neg_exact(n, k, Rat(1, 2), 5);
      const double got = gibbs::log_V(model, n, k);
      if (v == 0) {
        CHECK(got == gibbs::neg_inf);
      } else {
        const double want = oracle::to_signed_log(v).log_mag;
        CHECK(std::fabs(got - want) < 1e-12 * std::max(1.0, std::fabs(want)));
      }
    }
}

TEST_CASE("gnedin V weights against exact rationals") {
  const auto model = GibbsModel::gnedin(0.5);
  CHECK(rel_err(std::exp(gibbs::log_V(model, 2, 1)), 1.0 / 3.0) < 1e-13);
  for (std::int64_t n = 1; n <= 9; ++n)
    for (std::int64_t k = 1; k <= n; ++k) {
      const double want =
          oracle::to_signed_log(V_gnedin_exact(n, k, Rat(1, 2))).log_mag;
      CHECK(std::fabs(gibbs::log_V(model, n, k) - want) <
            1e-12 * std::max(1.0, std::fabs(want)));
    }
}

TEST_CASE("finite-dirichlet mixture with explicit weights: exact rationals") {
  const auto model = GibbsModel::mixed_finite_dirichlet(
      0.5, MixingPMF::explicit_weights({0.25, 0.25, 0.5}));
  CHECK(model.max_clusters() == 3);
  const std::vector<Rat> pi = {Rat(1, 4), Rat(1, 4), Rat(1, 2)};
  for (std::int64_t n = 1; n <= 9; ++n)
    for (std::int64_t k = 1; k <= std::min<std::int64_t>(n, 3); ++k) {
      const double want =
          oracle::to_signed_log(V_mfd_explicit_exact(n, k, Rat(1, 2), pi))
              .log_mag;
      CHECK(std::fabs(gibbs::log_V(model, n, k) - want) <
            1e-12 * std::max(1.0, std::fabs(want)));
    }
  CHECK(gibbs::log_V(model, 5, 4) == gibbs::neg_inf);
}

TEST_CASE("ngg V weights against frozen high-precision references") {
  const std::vector<std::array<double, 5>> cases = {
      {1, 1, 0.25, 48.4185, 0.0},
      {5, 3, 0.25, 1.7, -4.3326006564838132553},
      {20, 7, 0.5, 2.0, -36.471449747706245082},
      {50, 25, 0.25, 48.4185, -107.64633630678506904},
      {35, 20, 0.7353, 1.0, -54.697375912981324237},
      {12, 12, 0.9, 0.3, -1.0606915256865631676},
      {40, 1, 0.1, 5.0, -108.97878013569952839},
      {50, 25, 0.7353, 1.0, -96.805054982897192248},
  };
  for (const auto& [n, k, s, b, want] : cases) {
    const auto model = GibbsModel::ngg(s, b);
    CHECK(std::fabs(gibbs::log_V(model, static_cast<std::int64_t>(n),
                                 static_cast<std::int64_t>(k)) -
                    want) <= 1e-11 * std::max(1.0, std::fabs(want)));
  }
}

TEST_CASE("ngg quadrature agrees with the alternating-sum route at small n") {
  // Independent route: e^b s^{k-1}/Gamma(n) sum_i binom(n-1,i)(-1)^i
  // b^{i/s} Gamma(k - i/s, b), assembled with signed log arithmetic.
  for (const auto& [s, b] : std::vector<std::pair<double, double>>{
           {0.25, 1.7}, {0.5, 2.0}, {0.7353, 1.0}, {0.9, 0.3}}) {
    const auto model = GibbsModel::ngg(s, b);
    for (std::int64_t n = 1; n <= 14; ++n) {
      for (std::int64_t k = 1; k <= n; ++k) {
        std::vector<gibbs::SignedLog> terms;
        for (std::int64_t i = 0; i < n; ++i) {
          const double a = static_cast<double>(k) - static_cast<double>(i) / s;
          gibbs::SignedLog t = gibbs::SignedLog::from_log(
              gibbs::log_binomial(n - 1, i) +
              static_cast<double>(i) / s * std::log(b) +
              gibbs::log_upper_inc_gamma(a, b));
          if (i & 1) t = -t;
          terms.push_back(t);
        }
        bool cancel = false;
        const auto sum = gibbs::signed_log_sum(terms, &cancel);
        REQUIRE(sum.sign == 1);
        const double want = b + static_cast<double>(k - 1) * std::log(s) -
                            std::lgamma(static_cast<double>(n)) + sum.log_mag;
        const double tol = cancel ? 1e-6 : 1e-9;
        CHECK(std::fabs(gibbs::log_V(model, n, k) - want) <
              tol * std::max(1.0, std::fabs(want)));
      }
    }
  }
}

TEST_CASE("gnedin family equals the unit-discount mixture representation") {
  auto mix = GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::gnedin(0.5));
  mix.set_truncation_tol(1e-8);
  const auto closed = GibbsModel::gnedin(0.5);
  for (const auto& [n, k] :
       std::vector<std::pair<std::int64_t, std::int64_t>>{
           {3, 1}, {6, 3}, {10, 4}, {12, 6}}) {
    CHECK(rel_err(gibbs::log_V(mix, n, k), gibbs::log_V(closed, n, k)) <
          1e-6);
  }
}

TEST_CASE("gnedin-tail mixture refuses unreachable truncation tolerances") {
  const auto mix =
      GibbsModel::mixed_finite_dirichlet(1.0, MixingPMF::gnedin(0.5));
  CHECK_THROWS_AS(gibbs::log_V(mix, 3, 3), gibbs::NumericError);
}

TEST_CASE("partition probabilities sum to one over all partition classes") {
  for (const auto& model : model_matrix()) {
    const std::int64_t cap = model.max_clusters();
    for (std::int64_t n = 1; n <= 9; ++n) {
      double total = 0.0;
      for (const auto& cls : oracle::partition_classes(n)) {
        if (cap >= 0 && static_cast<std::int64_t>(cls.sizes.size()) > cap)
          continue;
        const double lp =
            gibbs::log_eppf(model, Partition::from_sizes(cls.sizes));
        if (lp == gibbs::neg_inf) continue;
        total += oracle::to_double(Rat(cls.count)) * std::exp(lp);
      }
      CHECK(std::fabs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("V recursion residual is tiny across the matrix") {
  for (const auto& model : model_matrix()) {
    const std::int64_t cap = model.max_clusters();
    for (std::int64_t n : {1, 2, 5, 13, 29}) {
      for (std::int64_t k = 1; k <= n; k += (n > 8 ? 3 : 1)) {
        if (cap >= 0 && k > cap) continue;
        const double lv = gibbs::log_V(model, n, k);
        if (lv == gibbs::neg_inf) continue;
        const double stay =
            (static_cast<double>(n) - model.sigma() * static_cast<double>(k)) *
            std::exp(gibbs::log_V(model, n + 1, k) - lv);
        const double up = std::exp(gibbs::log_V(model, n + 1, k + 1) - lv);
        CHECK(std::fabs(stay + up - 1.0) < 1e-10);
      }
    }
  }
}

TEST_CASE("predictive weights: closed forms, totals, eppf ratios") {
  const auto p = Partition::from_sizes({4, 2, 1});
  for (const auto& model : model_matrix()) {
    const auto w = gibbs::predictive_weights(model, p);
    REQUIRE(w.size() == 4);
    double total = 0.0;
    for (double x : w) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::fabs(total - 1.0) < 1e-11);
    CHECK(rel_err(w[0], gibbs::prob_new(model, 7, 3)) < 1e-11);
    // ratio route through the partition probability itself
    const double lp = gibbs::log_eppf(model, p);
    auto grown = p.sizes;
    ++grown[1];
    CHECK(rel_err(w[2], std::exp(gibbs::log_eppf(
                            model, Partition::from_sizes(grown)) -
                        lp)) < 1e-10);
  }
  const auto dp = GibbsModel::dirichlet(1.5);
  CHECK(rel_err(gibbs::prob_new(dp, 7, 3), 1.5 / 8.5) < 1e-14);
  const auto py = GibbsModel::pitman_yor(0.5, 1.0);
  CHECK(rel_err(gibbs::prob_new(py, 7, 3), 2.5 / 8.0) < 1e-14);
}

TEST_CASE("addition rule and dependence checks pass across the matrix") {
  for (const auto& model : model_matrix()) {
    const auto add = gibbs::check_addition_rule(model, 9);
    CHECK_MESSAGE(add.ok, model.name(), ": ", add.detail);
    const auto dep = gibbs::check_gibbs_dependence(model, 9);
    CHECK_MESSAGE(dep.ok, model.name(), ": ", dep.detail);
  }
}

TEST_CASE("sampled partitions match exact class probabilities") {
  const auto model = GibbsModel::pitman_yor(0.5, 1.0);
  const std::int64_t n = 6;
  std::map<std::vector<std::int64_t>, double> expected;
  for (const auto& cls : oracle::partition_classes(n))
    expected[cls.sizes] =
        oracle::to_double(Rat(cls.count) *
                          eppf_py_exact(Rat(1, 2), Rat(1), cls.sizes));
  const std::int64_t draws = 200000;
  gibbs::Rng rng(20260816);
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  for (std::int64_t t = 0; t < draws; ++t) {
    auto p = gibbs::sample_partition(model, n, rng);
    std::sort(p.sizes.begin(), p.sizes.end(), std::greater<>());
    ++counts[p.sizes];
  }
  double chi2 = 0.0;
  for (const auto& [sizes, prob] : expected) {
    const double exp_count = prob * static_cast<double>(draws);
    const double obs = static_cast<double>(counts[sizes]);
    chi2 += (obs - exp_count) * (obs - exp_count) / exp_count;
  }
  // 11 classes, 10 degrees of freedom; P(chi2 > 35) ~ 1e-4
  CHECK(chi2 < 35.0);
}

TEST_CASE("sampling is seed-reproducible") {
  const auto model = GibbsModel::ngg(0.5, 2.0);
  gibbs::Rng a(42), b(42), c(43);
  const auto pa = gibbs::sample_partition(model, 25, a);
  const auto pb = gibbs::sample_partition(model, 25, b);
  CHECK(pa.sizes == pb.sizes);
  bool same = true;
  gibbs::Rng d(43);
  for (int i = 0; i < 5; ++i) {
    const auto pc = gibbs::sample_partition(model, 25, c);
    const auto pd = gibbs::sample_partition(model, 25, d);
    same = same && pc.sizes == pd.sizes;
  }
  CHECK(same);
}

TEST_CASE("model json round trips and text parsing") {
  for (const auto& model : model_matrix()) {
    const auto j = model.to_json();
    const auto back = GibbsModel::from_json(j);
    CHECK(back.name() == model.name());
    CHECK(back.to_json() == j);
  }
  const auto py = GibbsModel::parse("pitman_yor:0.5,1.0");
  CHECK(py.family() == gibbs::Family::PitmanYor);
  CHECK(py.sigma() == 0.5);
  CHECK(py.theta() == 1.0);
  const auto viaj =
      GibbsModel::parse(R"({"family":"ngg","sigma":0.25,"beta":48.4185})");
  CHECK(viaj.family() == gibbs::Family::NGG);
  CHECK(viaj.beta() == 48.4185);
  const auto mfd = GibbsModel::parse("mfd:1.0,poisson,4.0");
  CHECK(mfd.family() == gibbs::Family::MixedFiniteDirichlet);
  CHECK(mfd.mixing().kind() == MixingPMF::Kind::Poisson);

  CHECK_THROWS_AS(GibbsModel::parse("pitman_yor:0.5"), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::parse("pitman_yor:0.5,1,9"), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::parse("nope:1"), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::parse("pitman_yor:axe,1"), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::parse("{\"family\":\"ngg\""), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::parse("  "), gibbs::DataError);
}

TEST_CASE("parameter validation rejects out-of-range models") {
  CHECK_THROWS_AS(GibbsModel::dirichlet(0.0), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::dirichlet(-1.0), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::pitman_yor(1.0, 1.0), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::pitman_yor(0.5, -0.5), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::pitman_yor(-0.5, 2.6), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::ngg(0.0, 1.0), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::ngg(0.5, 0.0), gibbs::DataError);
  CHECK_THROWS_AS(GibbsModel::gnedin(1.0), gibbs::DataError);
  CHECK_THROWS_AS(MixingPMF::poisson(0.0), gibbs::DataError);
  CHECK_THROWS_AS(MixingPMF::geometric(1.0), gibbs::DataError);
  CHECK_THROWS_AS(MixingPMF::explicit_weights({0.5, 0.4}), gibbs::DataError);
  CHECK_THROWS_AS(MixingPMF::explicit_weights({}), gibbs::DataError);
  const auto m = GibbsModel::dirichlet(1.0);
  CHECK_THROWS_AS(gibbs::log_V(m, 0, 1), gibbs::DomainError);
  CHECK_THROWS_AS(gibbs::log_V(m, 3, 4), gibbs::DomainError);
  CHECK_THROWS_AS(gibbs::log_V(m, 3, 0), gibbs::DomainError);
  CHECK_THROWS_AS(m.beta(), gibbs::DomainError);
  CHECK_THROWS_AS(m.mixing(), gibbs::DomainError);
}

TEST_CASE("mixing pmf mass and survival bounds") {
  for (const auto& pi :
       {MixingPMF::poisson(4.0), MixingPMF::geometric(0.5),
        MixingPMF::gnedin(0.3),
        MixingPMF::explicit_weights({0.125, 0.125, 0.25, 0.5})}) {
    double mass = 0.0;
    std::int64_t cut = 300;
    if (pi.kind() == MixingPMF::Kind::Gnedin) cut = 4000000;
    for (std::int64_t m = 1; m <= cut; ++m) {
      const double lp = pi.log_pmf(m);
      if (lp != gibbs::neg_inf) mass += std::exp(lp);
    }
    const double tail = std::exp(pi.log_survival(cut));
    CHECK(mass <= 1.0 + 1e-9);
    CHECK(mass + tail >= 1.0 - 1e-6);
    // survival bound must dominate the actual remaining mass
    CHECK(1.0 - mass <= tail + 1e-12);
  }
  CHECK(std::exp(MixingPMF::geometric(0.5).log_survival(10)) ==
        doctest::Approx(std::pow(0.5, 10)).epsilon(1e-12));
}
