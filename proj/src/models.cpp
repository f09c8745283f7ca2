#include "gibbs/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "gibbs/combinatorics.hpp"
#include "gibbs/errors.hpp"

namespace gibbs {

std::string family_name(Family f) {
  switch (f) {
    case Family::Dirichlet: return "dirichlet";
    case Family::PitmanYor: return "pitman_yor";
    case Family::NGG: return "ngg";
    case Family::Gnedin: return "gnedin";
    case Family::MixedFiniteDirichlet: return "mixed_finite_dirichlet";
  }
  return "?";
}

// ---------------------------------------------------------------- MixingPMF

MixingPMF MixingPMF::poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DataError("poisson mixing needs lambda > 0");
  return MixingPMF(Kind::Poisson, lambda);
}

MixingPMF MixingPMF::geometric(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw DataError("geometric mixing needs eta in (0,1)");
  return MixingPMF(Kind::Geometric, eta);
}

MixingPMF MixingPMF::gnedin(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DataError("gnedin mixing needs gamma in (0,1)");
  return MixingPMF(Kind::Gnedin, gamma);
}

MixingPMF MixingPMF::explicit_weights(std::vector<double> w) {
  if (w.empty()) throw DataError("explicit mixing needs at least one weight");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw DataError("explicit mixing weights must be nonnegative");
    total += x;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw DataError("explicit mixing weights must sum to 1 (got " +
                    std::to_string(total) + ")");
  MixingPMF pi(Kind::Explicit, 0.0);
  for (double& x : w) x /= total;
  pi.weights_ = std::move(w);
  pi.log_tail_.resize(pi.weights_.size());
  double tail = 0.0;
  for (std::size_t i = pi.weights_.size(); i-- > 0;) {
    pi.log_tail_[i] = tail > 0.0 ? std::log(tail) : neg_inf;
    tail += pi.weights_[i];
  }
  return pi;
}

double MixingPMF::log_pmf(std::int64_t m) const {
  if (m < 1) return neg_inf;
  const double md = static_cast<double>(m);
  switch (kind_) {
    case Kind::Poisson:
      return md * std::log(param_) - std::lgamma(md + 1.0) - param_ -
             std::log(-std::expm1(-param_));
    case Kind::Geometric:
      return std::log1p(-param_) + (md - 1.0) * std::log(param_);
    case Kind::Gnedin:
      return std::log(param_) + log_rising(1.0 - param_, m - 1) -
             std::lgamma(md + 1.0);
    case Kind::Explicit: {
      if (m > static_cast<std::int64_t>(weights_.size())) return neg_inf;
      const double w = weights_[static_cast<std::size_t>(m - 1)];
      return w > 0.0 ? std::log(w) : neg_inf;
    }
  }
  return neg_inf;
}

double MixingPMF::log_survival(std::int64_t cut) const {
  if (cut < 1) return 0.0;
  const double c = static_cast<double>(cut);
  switch (kind_) {
    case Kind::Poisson: {
      // Geometric-ratio bound from the first omitted term.
      const double r = param_ / (c + 2.0);
      if (r >= 1.0) return 0.0;
      return log_pmf(cut + 1) - std::log1p(-r);
    }
    case Kind::Geometric:
      return c * std::log(param_);
    case Kind::Gnedin:
      return log_rising(1.0 - param_, cut) - std::lgamma(c + 1.0);
    case Kind::Explicit:
      if (cut > static_cast<std::int64_t>(log_tail_.size())) return neg_inf;
      return log_tail_[static_cast<std::size_t>(cut - 1)];
  }
  return 0.0;
}

std::int64_t MixingPMF::support_max() const {
  return kind_ == Kind::Explicit
             ? static_cast<std::int64_t>(weights_.size())
             : -1;
}

nlohmann::json MixingPMF::to_json() const {
  switch (kind_) {
    case Kind::Poisson: return {{"kind", "poisson"}, {"lambda", param_}};
    case Kind::Geometric: return {{"kind", "geometric"}, {"eta", param_}};
    case Kind::Gnedin: return {{"kind", "gnedin"}, {"gamma", param_}};
    case Kind::Explicit: return {{"kind", "explicit"}, {"weights", weights_}};
  }
  return {};
}

MixingPMF MixingPMF::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw DataError("mixing pmf: expected object with \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "poisson") return poisson(j.at("lambda").get<double>());
    if (kind == "geometric") return geometric(j.at("eta").get<double>());
    if (kind == "gnedin") return gnedin(j.at("gamma").get<double>());
    if (kind == "explicit")
      return explicit_weights(j.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mixing pmf: ") + e.what());
  }
  throw DataError("mixing pmf: unknown kind \"" + kind + "\"");
}

// ---------------------------------------------------------------- GibbsModel

GibbsModel GibbsModel::dirichlet(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DataError("dirichlet needs theta > 0");
  GibbsModel m;
  m.family_ = Family::Dirichlet;
  m.a_ = theta;
  return m;
}

GibbsModel GibbsModel::pitman_yor(double sigma, double theta) {
  if (!(sigma < 1.0) || !std::isfinite(sigma) || !std::isfinite(theta))
    throw DataError("pitman_yor needs sigma < 1");
  if (sigma >= 0.0) {
    if (!(theta > -sigma))
      throw DataError("pitman_yor with sigma in [0,1) needs theta > -sigma");
  } else {
    const double ratio = theta / -sigma;
    const double m_near = std::round(ratio);
    if (!(theta > 0.0) || m_near < 1.0 ||
        std::fabs(ratio - m_near) > 1e-9 * std::max(1.0, ratio))
      throw DataError(
          "pitman_yor with sigma < 0 needs theta = m|sigma| for integer m >= 1");
  }
  GibbsModel m;
  m.family_ = Family::PitmanYor;
  m.a_ = sigma;
  m.b_ = theta;
  return m;
}

GibbsModel GibbsModel::ngg(double sigma, double beta) {
  if (!(sigma > 0.0 && sigma < 1.0) || !(beta > 0.0) || !std::isfinite(beta))
    throw DataError("ngg needs sigma in (0,1) and beta > 0");
  GibbsModel m;
  m.family_ = Family::NGG;
  m.a_ = sigma;
  m.b_ = beta;
  return m;
}

GibbsModel GibbsModel::gnedin(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DataError("gnedin needs gamma in (0,1)");
  GibbsModel m;
  m.family_ = Family::Gnedin;
  m.a_ = gamma;
  return m;
}

GibbsModel GibbsModel::mixed_finite_dirichlet(double abs_sigma, MixingPMF pi) {
  if (!(abs_sigma > 0.0) || !std::isfinite(abs_sigma))
    throw DataError("mixed_finite_dirichlet needs |sigma| > 0");
  GibbsModel m;
  m.family_ = Family::MixedFiniteDirichlet;
  m.a_ = abs_sigma;
  m.mixing_.push_back(std::move(pi));
  return m;
}

double GibbsModel::sigma() const {
  switch (family_) {
    case Family::Dirichlet: return 0.0;
    case Family::PitmanYor: return a_;
    case Family::NGG: return a_;
    case Family::Gnedin: return -1.0;
    case Family::MixedFiniteDirichlet: return -a_;
  }
  return 0.0;
}

double GibbsModel::theta() const {
  if (family_ == Family::Dirichlet) return a_;
  if (family_ == Family::PitmanYor) return b_;
  throw DomainError("theta: not a dirichlet / pitman_yor model");
}

double GibbsModel::beta() const {
  if (family_ != Family::NGG) throw DomainError("beta: not an ngg model");
  return b_;
}

double GibbsModel::gnedin_gamma() const {
  if (family_ != Family::Gnedin)
    throw DomainError("gnedin_gamma: not a gnedin model");
  return a_;
}

double GibbsModel::abs_sigma() const {
  if (family_ != Family::MixedFiniteDirichlet)
    throw DomainError("abs_sigma: not a mixed_finite_dirichlet model");
  return a_;
}

const MixingPMF& GibbsModel::mixing() const {
  if (mixing_.empty())
    throw DomainError("mixing: not a mixed_finite_dirichlet model");
  return mixing_.front();
}

std::int64_t GibbsModel::max_clusters() const {
  if (family_ == Family::PitmanYor && a_ < 0.0)
    return std::llround(b_ / -a_);
  if (family_ == Family::MixedFiniteDirichlet)
    return mixing_.front().support_max();
  return -1;
}

void GibbsModel::set_truncation_tol(double tol) {
  if (!(tol > 0.0 && tol < 1.0))
    throw DomainError("truncation_tol must lie in (0,1)");
  trunc_tol_ = tol;
}

namespace {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

std::string GibbsModel::name() const {
  switch (family_) {
    case Family::Dirichlet: return "dirichlet(" + fmt_num(a_) + ")";
    case Family::PitmanYor:
      return "pitman_yor(" + fmt_num(a_) + "," + fmt_num(b_) + ")";
    case Family::NGG: return "ngg(" + fmt_num(a_) + "," + fmt_num(b_) + ")";
    case Family::Gnedin: return "gnedin(" + fmt_num(a_) + ")";
    case Family::MixedFiniteDirichlet: {
      const auto j = mixing_.front().to_json();
      return "mixed_finite_dirichlet(" + fmt_num(a_) + "," +
             j.at("kind").get<std::string>() + ")";
    }
  }
  return "?";
}

nlohmann::json GibbsModel::to_json() const {
  switch (family_) {
    case Family::Dirichlet:
      return {{"family", "dirichlet"}, {"theta", a_}};
    case Family::PitmanYor:
      return {{"family", "pitman_yor"}, {"sigma", a_}, {"theta", b_}};
    case Family::NGG:
      return {{"family", "ngg"}, {"sigma", a_}, {"beta", b_}};
    case Family::Gnedin:
      return {{"family", "gnedin"}, {"gamma", a_}};
    case Family::MixedFiniteDirichlet:
      return {{"family", "mixed_finite_dirichlet"},
              {"abs_sigma", a_},
              {"mixing", mixing_.front().to_json()}};
  }
  return {};
}

GibbsModel GibbsModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw DataError("model: expected object with \"family\"");
  const std::string fam = j.at("family").get<std::string>();
  try {
    if (fam == "dirichlet" || fam == "dp")
      return dirichlet(j.at("theta").get<double>());
    if (fam == "pitman_yor" || fam == "py")
      return pitman_yor(j.at("sigma").get<double>(),
                        j.at("theta").get<double>());
    if (fam == "ngg")
      return ngg(j.at("sigma").get<double>(), j.at("beta").get<double>());
    if (fam == "gnedin") return gnedin(j.at("gamma").get<double>());
    if (fam == "mixed_finite_dirichlet" || fam == "mfd")
      return mixed_finite_dirichlet(j.at("abs_sigma").get<double>(),
                                    MixingPMF::from_json(j.at("mixing")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  throw DataError("model: unknown family \"" + fam + "\"");
}

GibbsModel GibbsModel::parse(const std::string& text) {
  std::string s = text;
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw DataError("model: empty spec");
  s = s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
  if (s.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(s);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("model: bad JSON: ") + e.what());
    }
    return from_json(j);
  }
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw DataError("model: expected family:params or JSON object");
  const std::string fam = s.substr(0, colon);
  std::vector<std::string> parts;
  std::stringstream ss(s.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  auto num = [&](std::size_t i) {
    if (i >= parts.size())
      throw DataError("model: missing parameter for " + fam);
    try {
      std::size_t pos = 0;
      const double v = std::stod(parts[i], &pos);
      if (pos != parts[i].size())
        throw DataError("model: bad number \"" + parts[i] + "\"");
      return v;
    } catch (const std::invalid_argument&) {
      throw DataError("model: bad number \"" + parts[i] + "\"");
    } catch (const std::out_of_range&) {
      throw DataError("model: number out of range \"" + parts[i] + "\"");
    }
  };
  auto expect_count = [&](std::size_t c) {
    if (parts.size() != c)
      throw DataError("model: " + fam + " takes " + std::to_string(c) +
                      " parameter(s)");
  };
  if (fam == "dirichlet" || fam == "dp") {
    expect_count(1);
    return dirichlet(num(0));
  }
  if (fam == "pitman_yor" || fam == "py") {
    expect_count(2);
    return pitman_yor(num(0), num(1));
  }
  if (fam == "ngg") {
    expect_count(2);
    return ngg(num(0), num(1));
  }
  if (fam == "gnedin") {
    expect_count(1);
    return gnedin(num(0));
  }
  if (fam == "mixed_finite_dirichlet" || fam == "mfd") {
    if (parts.size() != 3)
      throw DataError(
          "model: mixed_finite_dirichlet takes abs_sigma,kind,param");
    const std::string kind = parts[1];
    if (kind == "poisson")
      return mixed_finite_dirichlet(num(0), MixingPMF::poisson(num(2)));
    if (kind == "geometric")
      return mixed_finite_dirichlet(num(0), MixingPMF::geometric(num(2)));
    if (kind == "gnedin")
      return mixed_finite_dirichlet(num(0), MixingPMF::gnedin(num(2)));
    throw DataError("model: mixing kind must be poisson|geometric|gnedin");
  }
  throw DataError("model: unknown family \"" + fam + "\"");
}

// ---------------------------------------------------------------- Partition

Partition Partition::from_sizes(std::vector<std::int64_t> sizes) {
  Partition p;
  p.sizes = std::move(sizes);
  for (std::int64_t s : p.sizes) p.n += s;
  p.validate();
  return p;
}

Partition Partition::from_labels(const std::vector<std::int64_t>& labels) {
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t l : labels) ++counts[l];
  Partition p;
  p.n = static_cast<std::int64_t>(labels.size());
  for (const auto& [l, c] : counts) p.sizes.push_back(c);
  p.validate();
  return p;
}

void Partition::validate() const {
  if (n < 1 || sizes.empty())
    throw DataError("partition: need at least one observation");
  std::int64_t total = 0;
  for (std::int64_t s : sizes) {
    if (s < 1) throw DataError("partition: block sizes must be >= 1");
    total += s;
  }
  if (total != n) throw DataError("partition: block sizes must sum to n");
}

// ----------------------------------------------------------------- V weights

namespace {

// Log integrand of the normalized generalized gamma V after u = e^t:
// g(t) = n t - (n - k sigma) ln(1+e^t) - beta (1+e^t)^sigma.
double ngg_log_integrand(double t, double n, double ks, double sigma,
                         double beta) {
  const double l1p = t > 0.0 ? t + std::log1p(std::exp(-t))
                             : std::log1p(std::exp(t));
  return n * t - (n - ks) * l1p - beta * std::exp(sigma * l1p);
}

double ngg_log_integrand_deriv(double t, double n, double ks, double sigma,
                               double beta) {
  const double l1p = t > 0.0 ? t + std::log1p(std::exp(-t))
                             : std::log1p(std::exp(t));
  const double s = std::exp(t - l1p);  // e^t / (1+e^t)
  return n - (n - ks) * s - beta * sigma * std::exp(sigma * l1p) * s;
}

// V_{n,k} for the normalized generalized gamma process via the
// positive-integrand representation
//   V = e^b s^k b^k / Gamma(n) * Int_0^inf u^{n-1} (1+u)^{k s - n}
//       exp(-b (1+u)^s) du,
// integrated in log space. The integrand is log-concave in t = log u, so the
// mode is found by bisection on the derivative and the quadrature doubles
// Simpson panels until two refinements agree.
double log_V_ngg(std::int64_t n_, std::int64_t k_, double sigma, double beta) {
  const double n = static_cast<double>(n_);
  const double ks = static_cast<double>(k_) * sigma;
  auto g = [&](double t) { return ngg_log_integrand(t, n, ks, sigma, beta); };
  auto dg = [&](double t) {
    return ngg_log_integrand_deriv(t, n, ks, sigma, beta);
  };

  double lo = 0.0, hi = 1.0;
  while (dg(lo) < 0.0) lo -= std::max(1.0, -lo);
  while (dg(hi) > 0.0) hi += std::max(1.0, hi);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dg(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t_star = 0.5 * (lo + hi);
  const double g_star = g(t_star);

  const double drop = 60.0;
  double a = t_star - 1.0, b = t_star + 1.0;
  double step = 1.0;
  while (g(a) > g_star - drop) {
    a -= step;
    step *= 2.0;
  }
  step = 1.0;
  while (g(b) > g_star - drop) {
    b += step;
    step *= 2.0;
  }

  auto f = [&](double t) { return std::exp(g(t) - g_star); };
  // Composite Simpson with panel doubling; reuses previous evaluations
  // through the trapezoid refinement identity.
  std::int64_t panels = 64;
  double h = (b - a) / static_cast<double>(panels);
  double trap = 0.5 * (f(a) + f(b));
  for (std::int64_t i = 1; i < panels; ++i)
    trap += f(a + h * static_cast<double>(i));
  trap *= h;
  double simpson_prev = 0.0;
  double trap_prev = trap;
  for (int round = 0; round < 12; ++round) {
    double mid_sum = 0.0;
    for (std::int64_t i = 0; i < panels; ++i)
      mid_sum += f(a + h * (static_cast<double>(i) + 0.5));
    const double trap_next = 0.5 * (trap_prev + h * mid_sum);
    const double simpson = (4.0 * trap_next - trap_prev) / 3.0;
    panels *= 2;
    h *= 0.5;
    if (round > 0 &&
        std::fabs(simpson - simpson_prev) <= 1e-13 * std::fabs(simpson)) {
      simpson_prev = simpson;
      break;
    }
    simpson_prev = simpson;
    trap_prev = trap_next;
  }
  const double log_integral = g_star + std::log(simpson_prev);
  return beta + static_cast<double>(k_) * (std::log(sigma) + std::log(beta)) -
         std::lgamma(n) + log_integral;
}

// V_{n,k} for the finite-Dirichlet mixture: sum over the latent component
// count m >= k of pi(m) |s|^{k-1} (m-1)!/(m-k)! / (m|s|+1)_{n-1}, truncated
// by tail bounds that depend on the mixing family.
double log_V_mixed(std::int64_t n, std::int64_t k, double s,
                   const MixingPMF& pi, double tol) {
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  auto log_term = [&](std::int64_t m) {
    const double md = static_cast<double>(m);
    return pi.log_pmf(m) + (kd - 1.0) * std::log(s) + std::lgamma(md) -
           std::lgamma(md - kd + 1.0) -
           (std::lgamma(md * s + nd) - std::lgamma(md * s + 1.0));
  };

  OnlineLogSum acc;
  const std::int64_t support = pi.support_max();
  if (support >= 0) {
    for (std::int64_t m = k; m <= support; ++m) acc.add(log_term(m));
    return acc.log_total();
  }

  const double log_tol = std::log(tol);
  const std::int64_t max_terms = 10'000'000;
  for (std::int64_t m = k;; ++m) {
    if (m - k > max_terms)
      throw NumericError(
          "mixed_finite_dirichlet: mixing tail cannot reach the truncation "
          "tolerance; raise truncation_tol");
    const double lt = log_term(m);
    acc.add(lt);
    if (m == k) continue;
    double log_tail_bound = 0.0;
    bool have_bound = false;
    if (pi.kind() == MixingPMF::Kind::Gnedin) {
      // Terms decay like m^{-(n-k+1+gamma)}; integral comparison bound with
      // a safety factor of 2, valid once comfortably past the peak.
      if (m >= 2 * (n + 1)) {
        const double c = nd - kd + pi.param();
        log_tail_bound =
            lt + std::log(2.0 * static_cast<double>(m) / c);
        have_bound = true;
      }
    } else {
      // Ratio of consecutive terms is bounded by the mixing ratio times
      // m/(m-k+1), both decreasing; geometric tail bound once below 1.
      const double r = std::exp(pi.log_pmf(m + 1) - pi.log_pmf(m)) *
                       static_cast<double>(m) / (static_cast<double>(m) - kd + 1.0);
      if (r < 1.0) {
        log_tail_bound = lt + std::log(r / (1.0 - r));
        have_bound = true;
      }
    }
    if (have_bound && log_tail_bound <= log_tol + acc.log_total())
      return acc.log_total();
  }
}

void check_nk(std::int64_t n, std::int64_t k) {
  if (n < 1) throw DomainError("log_V: n must be >= 1");
  if (k < 1 || k > n) throw DomainError("log_V: k must lie in [1, n]");
}

}  // namespace

double log_V(const GibbsModel& model, std::int64_t n, std::int64_t k) {
  check_nk(n, k);
  const std::int64_t cap = model.max_clusters();
  if (cap >= 0 && k > cap) return neg_inf;
  switch (model.family()) {
    case Family::Dirichlet:
      return static_cast<double>(k) * std::log(model.theta()) -
             log_rising(model.theta(), n);
    case Family::PitmanYor: {
      const double sigma = model.sigma();
      const double theta = model.theta();
      double num;
      if (sigma > 0.0) {
        num = static_cast<double>(k - 1) * std::log(sigma) +
              std::lgamma(theta / sigma + static_cast<double>(k)) -
              std::lgamma(theta / sigma + 1.0);
      } else if (sigma == 0.0) {
        num = static_cast<double>(k - 1) * std::log(theta);
      } else {
        const double m = static_cast<double>(model.max_clusters());
        num = static_cast<double>(k - 1) * std::log(-sigma) +
              std::lgamma(m) - std::lgamma(m - static_cast<double>(k) + 1.0);
      }
      if (sigma == 0.0)
        return num + std::log(theta) - log_rising(theta, n);
      return num - log_rising(theta + 1.0, n - 1);
    }
    case Family::NGG:
      return log_V_ngg(n, k, model.sigma(), model.beta());
    case Family::Gnedin: {
      const double g = model.gnedin_gamma();
      return std::lgamma(static_cast<double>(k)) +
             log_rising(1.0 - g, k - 1) + log_rising(g, n - k) -
             std::lgamma(static_cast<double>(n)) - log_rising(1.0 + g, n - 1);
    }
    case Family::MixedFiniteDirichlet:
      return log_V_mixed(n, k, model.abs_sigma(), model.mixing(),
                         model.truncation_tol());
  }
  throw DomainError("log_V: unknown family");
}

std::vector<double> log_V_row(const GibbsModel& model, std::int64_t n,
                              std::int64_t k_lo, std::int64_t k_hi) {
  if (k_lo < 1 || k_hi < k_lo)
    throw DomainError("log_V_row: need 1 <= k_lo <= k_hi");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (std::int64_t k = k_lo; k <= k_hi; ++k)
    out.push_back(k <= n ? log_V(model, n, k) : neg_inf);
  return out;
}

// --------------------------------------------------------------------- EPPF

double log_eppf(const GibbsModel& model, const Partition& p) {
  p.validate();
  const double lv = log_V(model, p.n, p.k());
  if (lv == neg_inf) return neg_inf;
  const double sigma = model.sigma();
  double acc = lv;
  for (std::int64_t s : p.sizes) acc += log_rising(1.0 - sigma, s - 1);
  return acc;
}

double log_eppf_dirichlet_closed(double theta, const Partition& p) {
  p.validate();
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  double acc = static_cast<double>(p.k()) * std::log(theta) -
               log_rising(theta, p.n);
  for (std::int64_t s : p.sizes) acc += std::lgamma(static_cast<double>(s));
  return acc;
}

double log_eppf_pitman_yor_closed(double sigma, double theta,
                                  const Partition& p) {
  p.validate();
  if (!(sigma >= 0.0 && sigma < 1.0) || !(theta > -sigma))
    throw DomainError("need sigma in [0,1), theta > -sigma");
  double acc = -log_rising(theta + 1.0, p.n - 1);
  for (std::int64_t i = 1; i < p.k(); ++i)
    acc += std::log(theta + static_cast<double>(i) * sigma);
  for (std::int64_t s : p.sizes) acc += log_rising(1.0 - sigma, s - 1);
  return acc;
}

double prob_new(const GibbsModel& model, std::int64_t n, std::int64_t k) {
  check_nk(n, k);
  switch (model.family()) {
    case Family::Dirichlet:
      return model.theta() / (model.theta() + static_cast<double>(n));
    case Family::PitmanYor:
      return (model.theta() + static_cast<double>(k) * model.sigma()) /
             (model.theta() + static_cast<double>(n));
    default: {
      const double lv = log_V(model, n, k);
      const double lv_new = log_V(model, n + 1, k + 1);
      return lv_new == neg_inf ? 0.0 : std::exp(lv_new - lv);
    }
  }
}

std::vector<double> predictive_weights(const GibbsModel& model,
                                       const Partition& p) {
  p.validate();
  const std::int64_t n = p.n;
  const std::int64_t k = p.k();
  const double sigma = model.sigma();
  const double lv = log_V(model, n, k);
  if (lv == neg_inf)
    throw DomainError("predictive_weights: partition impossible under model");
  std::vector<double> w(static_cast<std::size_t>(k) + 1);
  w[0] = prob_new(model, n, k);
  const double log_grow = log_V(model, n + 1, k) - lv;
  for (std::int64_t j = 0; j < k; ++j)
    w[static_cast<std::size_t>(j) + 1] =
        std::exp(log_grow) *
        (static_cast<double>(p.sizes[static_cast<std::size_t>(j)]) - sigma);
  return w;
}

Partition sample_partition(const GibbsModel& model, std::int64_t n, Rng& rng) {
  if (n < 1) throw DomainError("sample_partition: n must be >= 1");
  std::vector<std::int64_t> sizes{1};
  const double sigma = model.sigma();
  for (std::int64_t t = 1; t < n; ++t) {
    const std::int64_t k = static_cast<std::int64_t>(sizes.size());
    const double p_new = prob_new(model, t, k);
    if (rng.uniform() < p_new) {
      sizes.push_back(1);
      continue;
    }
    // Existing-cluster weights are proportional to n_j - sigma; their total
    // is t - k sigma.
    double v = rng.uniform() * (static_cast<double>(t) -
                                static_cast<double>(k) * sigma);
    std::size_t j = 0;
    for (; j + 1 < sizes.size(); ++j) {
      v -= static_cast<double>(sizes[j]) - sigma;
      if (v <= 0.0) break;
    }
    ++sizes[j];
  }
  return Partition::from_sizes(std::move(sizes));
}

// ------------------------------------------------------------------- checks

namespace {

void for_each_partition(
    std::int64_t n,
    const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  std::vector<std::int64_t> parts;
  std::function<void(std::int64_t, std::int64_t)> rec =
      [&](std::int64_t rest, std::int64_t max_part) {
        if (rest == 0) {
          fn(parts);
          return;
        }
        for (std::int64_t p = std::min(rest, max_part); p >= 1; --p) {
          parts.push_back(p);
          rec(rest - p, p);
          parts.pop_back();
        }
      };
  rec(n, n);
}

std::string fmt_partition(const std::vector<std::int64_t>& sizes) {
  std::string s = "(";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sizes[i]);
  }
  return s + ")";
}

}  // namespace

CheckResult check_addition_rule(const GibbsModel& model, std::int64_t n_max) {
  if (n_max < 2 || n_max > 16)
    throw DomainError("check_addition_rule: n_max in [2,16]");
  const std::int64_t cap = model.max_clusters();
  CheckResult res;
  for (std::int64_t n = 1; n < n_max && res.ok; ++n) {
    for_each_partition(n, [&](const std::vector<std::int64_t>& sizes) {
      if (!res.ok) return;
      const std::int64_t k = static_cast<std::int64_t>(sizes.size());
      if (cap >= 0 && k > cap) return;
      const Partition p = Partition::from_sizes(sizes);
      const double lp = log_eppf(model, p);
      if (lp == neg_inf) return;
      double total = 0.0;
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        auto grown = sizes;
        ++grown[j];
        total += std::exp(log_eppf(model, Partition::from_sizes(grown)) - lp);
      }
      auto extended = sizes;
      extended.push_back(1);
      total += std::exp(log_eppf(model, Partition::from_sizes(extended)) - lp);
      if (std::fabs(total - 1.0) > 1e-10) {
        res.ok = false;
        res.detail = "addition rule off by " + fmt_num(total - 1.0) + " at " +
                     fmt_partition(sizes);
      }
    });
  }
  return res;
}

CheckResult check_gibbs_dependence(const GibbsModel& model,
                                   std::int64_t n_max) {
  if (n_max < 3 || n_max > 16)
    throw DomainError("check_gibbs_dependence: n_max in [3,16]");
  const std::int64_t cap = model.max_clusters();
  const double sigma = model.sigma();
  CheckResult res;

  for (std::int64_t n = 1; n + 1 < n_max && res.ok; ++n) {
    // (a) the EPPF-ratio probability of a new cluster is a function of (n,k)
    std::map<std::int64_t, std::pair<double, std::vector<std::int64_t>>> seen;
    for_each_partition(n, [&](const std::vector<std::int64_t>& sizes) {
      if (!res.ok) return;
      const std::int64_t k = static_cast<std::int64_t>(sizes.size());
      if (cap >= 0 && k > cap) return;
      const Partition p = Partition::from_sizes(sizes);
      const double lp = log_eppf(model, p);
      if (lp == neg_inf) return;
      auto extended = sizes;
      extended.push_back(1);
      const double pn =
          std::exp(log_eppf(model, Partition::from_sizes(extended)) - lp);
      auto [it, inserted] = seen.try_emplace(k, pn, sizes);
      if (!inserted &&
          std::fabs(pn - it->second.first) >
              1e-10 * std::max(1.0, std::fabs(it->second.first))) {
        res.ok = false;
        res.detail = "new-cluster probability differs between " +
                     fmt_partition(it->second.second) + " and " +
                     fmt_partition(sizes);
        return;
      }
      if (std::fabs(pn - prob_new(model, n, k)) > 1e-10) {
        res.ok = false;
        res.detail =
            "new-cluster probability from the partition probability ratio "
            "disagrees with prob_new at " +
            fmt_partition(sizes);
        return;
      }
      // (b) growth weights proportional to n_j - sigma
      double ref = neg_inf;
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        auto grown = sizes;
        ++grown[j];
        const double w =
            std::exp(log_eppf(model, Partition::from_sizes(grown)) - lp) /
            (static_cast<double>(sizes[j]) - sigma);
        if (ref == neg_inf)
          ref = w;
        else if (std::fabs(w - ref) > 1e-10 * std::max(1.0, std::fabs(ref))) {
          res.ok = false;
          res.detail = "growth weight not proportional to (n_j - sigma) at " +
                       fmt_partition(sizes);
          return;
        }
      }
      // (c) the two orders of (new cluster, grow block j) give one mass.
      // Both routes go through the predictive rule, so they exercise the
      // V weights at different intermediate (n,k); partition-probability
      // ratios would telescope and check nothing.
      if (cap >= 0 && k + 1 > cap) return;
      auto mid_new = sizes;
      mid_new.push_back(1);
      const auto w_after_new =
          predictive_weights(model, Partition::from_sizes(mid_new));
      const auto w_now = predictive_weights(model, p);
      const double pn_next = prob_new(model, n + 1, k);
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        const double route1 = w_now[0] * w_after_new[j + 1];
        const double route2 = w_now[j + 1] * pn_next;
        if (std::fabs(route1 - route2) > 1e-10 * std::max(route1, route2)) {
          res.ok = false;
          res.detail = "two-step masses disagree at " + fmt_partition(sizes);
          return;
        }
      }
    });
  }
  return res;
}

}  // namespace gibbs
