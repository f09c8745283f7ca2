#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gibbs/clustering.hpp"
#include "gibbs/consistency.hpp"
#include "gibbs/errors.hpp"
#include "gibbs/mixture.hpp"
#include "gibbs/models.hpp"
#include "gibbs/rng.hpp"
#include "gibbs/species.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void emit_error(const std::string& type, const std::string& message) {
  json err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cerr << err.dump() << "\n";
}

gibbs::GibbsModel parse_model_arg(const std::string& spec) {
  if (std::filesystem::exists(spec)) {
    std::ifstream in(spec);
    std::stringstream buf;
    buf << in.rdbuf();
    return gibbs::GibbsModel::parse(buf.str());
  }
  return gibbs::GibbsModel::parse(spec);
}

// --data resolution: literal path, then $GIBBS_DATA_DIR, then the bundled
// fixture directory.
std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("GIBBS_DATA_DIR")) {
    const auto p = fs::path(dir) / path;
    if (fs::exists(p)) return p.string();
  }
  const auto bundled = fs::path(GIBBS_BUNDLED_DATA_DIR) / path;
  if (fs::exists(bundled)) return bundled.string();
  return path;
}

std::vector<std::int64_t> parse_int_list(const std::string& text,
                                         const std::string& what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw gibbs::DataError(what + ": bad integer \"" + item + "\"");
    }
  }
  if (out.empty()) throw gibbs::DataError(what + ": empty list");
  return out;
}

gibbs::Family parse_family(const std::string& name) {
  if (name == "dp" || name == "dirichlet") return gibbs::Family::Dirichlet;
  if (name == "py" || name == "pitman_yor") return gibbs::Family::PitmanYor;
  if (name == "ngg") return gibbs::Family::NGG;
  throw gibbs::DataError("family must be dp|py|ngg, got \"" + name + "\"");
}

gibbs::MixingPMF parse_mixing(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw gibbs::DataError("mixing: expected kind:params, got \"" + spec +
                           "\"");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  auto one = [&]() {
    try {
      std::size_t pos = 0;
      const double v = std::stod(rest, &pos);
      if (pos != rest.size()) throw std::invalid_argument(rest);
      return v;
    } catch (const std::exception&) {
      throw gibbs::DataError("mixing: bad number \"" + rest + "\"");
    }
  };
  if (kind == "poisson") return gibbs::MixingPMF::poisson(one());
  if (kind == "geometric") return gibbs::MixingPMF::geometric(one());
  if (kind == "gnedin") return gibbs::MixingPMF::gnedin(one());
  if (kind == "explicit") {
    std::vector<double> w;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        w.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw gibbs::DataError("mixing: bad weight \"" + item + "\"");
      }
    }
    return gibbs::MixingPMF::explicit_weights(w);
  }
  throw gibbs::DataError(
      "mixing kind must be poisson|geometric|gnedin|explicit");
}

gibbs::TruthRegime parse_regime(const std::string& spec) {
  if (spec == "diffuse") return gibbs::TruthRegime::diffuse();
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon != std::string::npos) {
    const std::string rest = spec.substr(colon + 1);
    try {
      std::size_t pos = 0;
      if (kind == "uniform") {
        const auto n = std::stoll(rest, &pos);
        if (pos == rest.size())
          return gibbs::TruthRegime::discrete_uniform(n);
      } else if (kind == "geometric") {
        const double q = std::stod(rest, &pos);
        if (pos == rest.size())
          return gibbs::TruthRegime::discrete_geometric(q);
      }
    } catch (const gibbs::Error&) {
      throw;
    } catch (const std::exception&) {
    }
  }
  throw gibbs::DataError(
      "regime must be diffuse | uniform:N | geometric:q, got \"" + spec +
      "\"");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gibbs::DataError("cannot open for writing: " + path);
  out << text;
  if (!out) throw gibbs::DataError("write failed: " + path);
}

std::vector<double> load_numeric_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gibbs::DataError("cannot open: " + path);
  std::vector<double> out;
  double x;
  while (in >> x) out.push_back(x);
  if (!in.eof()) {
    std::string tail;
    in.clear();
    in >> tail;
    throw gibbs::DataError(path + ": not a number: \"" + tail + "\"");
  }
  if (out.empty()) throw gibbs::DataError(path + ": no values");
  return out;
}

template <typename F>
void parallel_for(std::int64_t count, int threads, F body) {
  if (threads <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  const int workers = static_cast<int>(
      std::min<std::int64_t>(threads, count));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= count) break;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

json model_brief(const gibbs::GibbsModel& model) {
  json j;
  j["model"] = model.name();
  j["sigma"] = model.sigma();
  return j;
}

// ------------------------------------------------------------- subcommands

struct SpeciesArgs {
  std::string data;
  bool labels = false;
  std::string model_spec;
  std::string fit_family;
};

std::pair<gibbs::SpeciesSample, gibbs::GibbsModel> species_setup(
    const SpeciesArgs& a, json& out) {
  if (a.data.empty()) throw gibbs::DataError("species: --data is required");
  if (a.model_spec.empty() == a.fit_family.empty())
    throw gibbs::DataError("species: give exactly one of --model / --fit");
  const auto path = resolve_data_path(a.data);
  const auto sample = a.labels ? gibbs::load_raw_labels(path)
                               : gibbs::load_frequency_counts(path);
  out["data"] = path;
  out["n"] = sample.n;
  out["k"] = sample.k;
  if (!a.model_spec.empty())
    return {sample, parse_model_arg(a.model_spec)};
  const auto fit =
      gibbs::empirical_bayes_fit(parse_family(a.fit_family), sample);
  out["fit"] = {{"log_likelihood", fit.log_likelihood},
                {"degenerate", fit.degenerate}};
  return {sample, fit.model};
}

int run_kn(const std::string& model_spec, std::int64_t n,
           const std::string& out_path) {
  const auto model = parse_model_arg(model_spec);
  const auto dist = gibbs::prior_Kn_pmf(model, n);
  std::ostringstream csv;
  csv << "k,prob\n";
  for (std::int64_t k = 1; k <= n; ++k)
    csv << k << "," << fmt_g(dist.prob(k)) << "\n";
  if (out_path.empty()) {
    std::cout << csv.str();
    return 0;
  }
  write_text(out_path, csv.str());
  json j = model_brief(model);
  j["n"] = n;
  j["mean"] = dist.mean();
  j["variance"] = dist.variance();
  j["rows"] = n;
  j["out"] = out_path;
  std::cout << j.dump() << "\n";
  return 0;
}

int run_eppf(const std::string& model_spec, const std::string& sizes_text) {
  const auto model = parse_model_arg(model_spec);
  const auto sizes = parse_int_list(sizes_text, "--sizes");
  const auto part = gibbs::Partition::from_sizes(sizes);
  const double le = gibbs::log_eppf(model, part);
  json j = model_brief(model);
  j["sizes"] = sizes;
  j["n"] = part.n;
  j["k"] = part.k();
  j["log_eppf"] = le;
  j["eppf"] = std::exp(le);
  std::cout << j.dump() << "\n";
  return 0;
}

int run_predict(const std::string& model_spec,
                const std::string& sizes_text) {
  const auto model = parse_model_arg(model_spec);
  const auto sizes = parse_int_list(sizes_text, "--sizes");
  const auto part = gibbs::Partition::from_sizes(sizes);
  const auto w = gibbs::predictive_weights(model, part);
  json j = model_brief(model);
  j["sizes"] = sizes;
  j["n"] = part.n;
  j["k"] = part.k();
  j["prob_new"] = w[0];
  j["weights"] = w;
  std::cout << j.dump() << "\n";
  return 0;
}

int run_elicit(const std::string& family, double sigma, std::int64_t n,
               double target) {
  const auto fam = parse_family(family);
  const auto model = gibbs::elicit(fam, sigma, n, target);
  json j = model_brief(model);
  j["family"] = family;
  if (fam == gibbs::Family::NGG)
    j["beta"] = model.beta();
  else
    j["theta"] = model.theta();
  j["n"] = n;
  j["target"] = target;
  j["achieved_mean"] = gibbs::expected_Kn(model, n);
  std::cout << j.dump() << "\n";
  return 0;
}

int run_species_km(const SpeciesArgs& sa, std::int64_t m, double level,
                   bool curve, const std::string& out_path,
                   std::uint64_t seed) {
  json j;
  const auto [sample, model] = species_setup(sa, j);
  j.update(model_brief(model));
  gibbs::Rng rng(seed);
  const auto rep = gibbs::estimate_Km(model, sample, m, level, &rng);
  j["m"] = m;
  j["estimate"] = rep.estimate;
  j["method"] = gibbs::method_name(rep.method);
  if (rep.interval) {
    j["interval"] = {{"lo", rep.interval->lo},
                     {"hi", rep.interval->hi},
                     {"level", rep.interval->level}};
  } else {
    j["interval"] = nullptr;
  }
  json warnings = json::array();
  if (rep.method == gibbs::EstimateMethod::asymptotic &&
      m < 10 * sample.n)
    warnings.push_back(
        "asymptotic interval outside its extrapolation regime (m < 10 n)");
  j["warnings"] = warnings;
  if (curve) {
    std::ostringstream csv;
    csv << "m,estimate\n";
    for (std::int64_t mi = 1; mi <= m; ++mi)
      csv << mi << ","
          << fmt_g(gibbs::estimate_Km(model, sample, mi).estimate) << "\n";
    if (out_path.empty()) {
      std::cout << csv.str();
      return 0;
    }
    write_text(out_path, csv.str());
    j["out"] = out_path;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int run_species_rare(const SpeciesArgs& sa, std::int64_t m,
                     std::int64_t tau) {
  json j;
  const auto [sample, model] = species_setup(sa, j);
  j.update(model_brief(model));
  j["m"] = m;
  j["tau"] = tau;
  j["estimate"] = gibbs::estimate_rare_variety(model, sample, m, tau);
  std::cout << j.dump() << "\n";
  return 0;
}

int run_species_freq(const SpeciesArgs& sa, const std::string& kind,
                     std::int64_t m, std::int64_t i) {
  json j;
  const auto [sample, model] = species_setup(sa, j);
  j.update(model_brief(model));
  j["m"] = m;
  j["i"] = i;
  j["kind"] = kind;
  if (kind == "new")
    j["estimate"] = gibbs::estimate_new_with_freq(model, sample, m, i);
  else if (kind == "old")
    j["estimate"] = gibbs::estimate_old_with_freq(model, sample, m, i);
  else
    throw gibbs::DataError("species freq: --kind must be new|old");
  std::cout << j.dump() << "\n";
  return 0;
}

int run_species_discovery(const SpeciesArgs& sa, std::int64_t m,
                          std::int64_t i, bool curve,
                          const std::string& out_path) {
  json j;
  const auto [sample, model] = species_setup(sa, j);
  j.update(model_brief(model));
  j["m"] = m;
  j["i"] = i;
  const double u = m == 0
                       ? gibbs::discovery_prob_current(model, sample, i)
                       : gibbs::discovery_prob_future(model, sample, m, i);
  j["estimate"] = u;
  if (i == 0) j["coverage"] = 1.0 - u;
  if (m == 0) j["turing"] = gibbs::turing_estimator(sample, i);
  if (m >= 1 && i == 0) {
    const auto gt = gibbs::good_toulmin(sample, m);
    j["good_toulmin"] = {{"u_new", gt.u_new},
                         {"k_new", gt.k_new},
                         {"out_of_range", gt.out_of_range}};
  }
  if (curve) {
    if (m < 1)
      throw gibbs::DataError("species discovery: --curve needs --m >= 1");
    std::ostringstream csv;
    if (i == 0) {
      csv << "m,estimate,good_toulmin,gt_out_of_range\n";
      for (std::int64_t mi = 1; mi <= m; ++mi) {
        const double ui =
            gibbs::discovery_prob_future(model, sample, mi, 0);
        const auto gt = gibbs::good_toulmin(sample, mi);
        csv << mi << "," << fmt_g(ui) << "," << fmt_g(gt.u_new) << ","
            << (gt.out_of_range ? 1 : 0) << "\n";
      }
    } else {
      csv << "m,estimate\n";
      for (std::int64_t mi = 1; mi <= m; ++mi)
        csv << mi << ","
            << fmt_g(gibbs::discovery_prob_future(model, sample, mi, i))
            << "\n";
    }
    if (out_path.empty()) {
      std::cout << csv.str();
      return 0;
    }
    write_text(out_path, csv.str());
    j["out"] = out_path;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int run_eb_fit(const std::string& family, const SpeciesArgs& sa) {
  json j;
  SpeciesArgs local = sa;
  local.model_spec = "dp:1";  // placeholder; fit below decides the model
  const auto [sample, ignored] = species_setup(local, j);
  (void)ignored;
  const auto fit = gibbs::empirical_bayes_fit(parse_family(family), sample);
  j.update(model_brief(fit.model));
  j["family"] = family;
  if (fit.model.family() == gibbs::Family::NGG)
    j["beta"] = fit.model.beta();
  else
    j["theta"] = fit.model.theta();
  j["log_likelihood"] = fit.log_likelihood;
  j["degenerate"] = fit.degenerate;
  std::cout << j.dump() << "\n";
  return 0;
}

struct MixtureCliArgs {
  std::string model_spec;
  std::string data;
  std::optional<std::uint64_t> toy_seed;
  std::int64_t iters = 100000;
  std::int64_t burnin = 5000;
  std::int64_t thinning = 1;
  std::int64_t aux = 3;
  double mu0 = 0.0;
  double mu_var = 0.001;
  std::string out;
  std::string density_out;
  std::string grid = "-4:15:0.05";
};

std::vector<double> parse_grid(const std::string& spec) {
  double lo, hi, step;
  char c1, c2;
  std::stringstream ss(spec);
  if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
      !(step > 0.0) || hi < lo || !ss.eof())
    throw gibbs::DataError("--grid must be lo:hi:step, got \"" + spec +
                           "\"");
  std::vector<double> grid;
  for (double y = lo; y <= hi + 1e-12; y += step) grid.push_back(y);
  return grid;
}

int run_mixture_fit(const MixtureCliArgs& a, std::uint64_t seed) {
  gibbs::MixtureConfig cfg;
  cfg.model = parse_model_arg(a.model_spec);
  cfg.iters = a.iters;
  cfg.burnin = a.burnin;
  cfg.thinning = a.thinning;
  cfg.aux_components = a.aux;
  cfg.mu0 = a.mu0;
  cfg.mu_var = a.mu_var;
  cfg.seed = seed;
  if (a.data.empty() == !a.toy_seed.has_value())
    throw gibbs::DataError(
        "mixture fit: give exactly one of --data / --toy-seed");
  const auto data = a.data.empty()
                        ? gibbs::simulate_toy_data(*a.toy_seed)
                        : load_numeric_column(resolve_data_path(a.data));
  const auto trace = gibbs::fit(cfg, data);
  const auto post = gibbs::posterior_Kn_pmf(trace);
  json j = model_brief(cfg.model);
  j["n"] = trace.n;
  j["draws"] = trace.k_draws.size();
  j["k_pmf"] = post.prob;
  j["k_mcse"] = post.mcse;
  j["k_mode"] = static_cast<std::int64_t>(
      std::max_element(post.prob.begin(), post.prob.end()) -
      post.prob.begin());
  double k_mean = 0.0;
  for (std::size_t k = 0; k < post.prob.size(); ++k)
    k_mean += static_cast<double>(k) * post.prob[k];
  j["k_mean"] = k_mean;
  j["mu_mean"] = std::accumulate(trace.mu_draws.begin(),
                                 trace.mu_draws.end(), 0.0) /
                 static_cast<double>(trace.mu_draws.size());
  j["tau_mean"] = std::accumulate(trace.tau_draws.begin(),
                                  trace.tau_draws.end(), 0.0) /
                  static_cast<double>(trace.tau_draws.size());
  if (!a.out.empty()) {
    std::ostringstream csv;
    csv << "k,prob,mcse\n";
    for (std::size_t k = 0; k < post.prob.size(); ++k)
      csv << k << "," << fmt_g(post.prob[k]) << "," << fmt_g(post.mcse[k])
          << "\n";
    write_text(a.out, csv.str());
    j["out"] = a.out;
  }
  if (!a.density_out.empty()) {
    const auto grid = parse_grid(a.grid);
    const auto dens = gibbs::density_estimate(trace, grid);
    std::ostringstream csv;
    csv << "y,density\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
      csv << fmt_g(grid[g]) << "," << fmt_g(dens[g]) << "\n";
    write_text(a.density_out, csv.str());
    j["density_out"] = a.density_out;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int run_consistency(const std::string& model_spec, const std::string& regime_spec,
                    std::int64_t n_max, int seeds, const std::string& tails,
                    std::int64_t m_max, const std::string& out_path,
                    std::uint64_t seed, int threads) {
  if (tails.empty() == model_spec.empty())
    throw gibbs::DataError(
        "consistency: give exactly one of --model / --tails");
  if (!tails.empty()) {
    const auto mixing = parse_mixing(tails);
    const auto rep = gibbs::check_tail_conditions(mixing, m_max);
    json j;
    j["mixing"] = tails;
    j["m_max"] = rep.m_max;
    j["t1_holds"] = rep.t1_holds;
    j["t1_from"] = rep.t1_from;
    j["t2_holds"] = rep.t2_holds;
    j["t2_constant"] = rep.t2_constant;
    if (!out_path.empty()) {
      std::ostringstream csv;
      csv << "m,ratio\n";
      for (std::size_t idx = 0; idx < rep.ratio.size(); ++idx)
        csv << idx + 1 << "," << fmt_g(rep.ratio[idx]) << "\n";
      write_text(out_path, csv.str());
      j["out"] = out_path;
    }
    std::cout << j.dump() << "\n";
    return 0;
  }

  const auto model = parse_model_arg(model_spec);
  const auto regime = parse_regime(regime_spec);
  if (regime.kind() == gibbs::TruthRegime::Kind::Diffuse) seeds = 1;
  if (seeds < 1) throw gibbs::DataError("consistency: --seeds must be >= 1");
  std::vector<std::vector<gibbs::TrajectoryPoint>> runs(
      static_cast<std::size_t>(seeds));
  parallel_for(seeds, threads, [&](std::int64_t s) {
    gibbs::Rng rng(gibbs::Rng::derive(seed, static_cast<std::uint64_t>(s)));
    runs[static_cast<std::size_t>(s)] =
        gibbs::alpha_trajectory(model, regime, n_max, rng);
  });
  // average the ratio across seeds, pointwise on the shared n grid
  const auto& grid_run = runs.front();
  std::vector<double> ratio(grid_run.size(), 0.0);
  for (const auto& run : runs)
    for (std::size_t i = 0; i < run.size(); ++i)
      ratio[i] += run[i].ratio / static_cast<double>(seeds);

  const auto alpha = gibbs::alpha_theoretical(model, regime);
  json j = model_brief(model);
  j["regime"] = regime.name();
  j["n_max"] = n_max;
  j["seeds"] = seeds;
  j["alpha_theoretical"] = alpha ? json(*alpha) : json(nullptr);
  j["final_ratio"] = ratio.back();
  if (seeds == 1) j["final_kappa"] = grid_run.back().kappa;
  if (alpha && std::isfinite(ratio.back()))
    j["converged"] = std::fabs(ratio.back() - *alpha) <= 0.02;
  if (!out_path.empty()) {
    std::ostringstream csv;
    csv << "n,ratio,alpha_theoretical\n";
    for (std::size_t i = 0; i < grid_run.size(); ++i) {
      csv << grid_run[i].n << "," << fmt_g(ratio[i]) << ",";
      if (alpha) csv << fmt_g(*alpha);
      csv << "\n";
    }
    write_text(out_path, csv.str());
    j["out"] = out_path;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs-type random partition toolkit"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  int threads = 1;
  app.add_option("--seed", seed, "RNG seed (bit-reproducible outputs)");
  app.add_option("--threads", threads,
                 "worker threads for Monte Carlo subcommands");

  // eppf
  auto* eppf = app.add_subcommand("eppf", "Partition probability");
  eppf->fallthrough();
  std::string eppf_model, eppf_sizes;
  eppf->add_option("--model", eppf_model, "family:params or JSON (file)")
      ->required();
  eppf->add_option("--sizes", eppf_sizes, "cluster sizes, e.g. 3,2,1")
      ->required();

  // predict
  auto* predict = app.add_subcommand("predict", "One-step predictive weights");
  predict->fallthrough();
  std::string pred_model, pred_sizes;
  predict->add_option("--model", pred_model, "family:params or JSON (file)")
      ->required();
  predict->add_option("--sizes", pred_sizes, "cluster sizes, e.g. 3,2,1")
      ->required();

  // kn
  auto* kn = app.add_subcommand("kn", "Prior law of the cluster count");
  kn->fallthrough();
  std::string kn_model, kn_out;
  std::int64_t kn_n = 0;
  kn->add_option("--model", kn_model)->required();
  kn->add_option("--n", kn_n, "sample size")->required();
  kn->add_option("--out", kn_out, "CSV path (default: CSV on stdout)");

  // elicit
  auto* elicit = app.add_subcommand(
      "elicit", "Solve for the location parameter matching E(K_n)");
  elicit->fallthrough();
  std::string el_family;
  double el_sigma = 0.0, el_target = 0.0;
  std::int64_t el_n = 0;
  elicit->add_option("--family", el_family, "dp|py|ngg")->required();
  elicit->add_option("--sigma", el_sigma, "discount (py/ngg)");
  elicit->add_option("--n", el_n)->required();
  elicit->add_option("--target", el_target, "target E(K_n)")->required();

  // species
  auto* species =
      app.add_subcommand("species", "Species-sampling estimators");
  species->fallthrough();
  species->require_subcommand(1);
  SpeciesArgs sa;
  species->add_option("--data", sa.data,
                      "frequency-count CSV (or label file with --labels)");
  species->add_flag("--labels", sa.labels,
                    "treat --data as newline-delimited labels");
  species->add_option("--model", sa.model_spec, "family:params or JSON");
  species->add_option("--fit", sa.fit_family,
                      "empirical Bayes family dp|py|ngg");
  auto* sp_km = species->add_subcommand("km", "new-species count for m more");
  sp_km->fallthrough();
  std::int64_t km_m = 0;
  double km_level = 0.0;
  bool km_curve = false;
  std::string km_out;
  sp_km->add_option("--m", km_m, "additional sample size")->required();
  sp_km->add_option("--level", km_level, "credible level (0 = none)");
  sp_km->add_flag("--curve", km_curve, "CSV curve m=1..M");
  sp_km->add_option("--out", km_out, "CSV path for --curve");
  auto* sp_rare = species->add_subcommand(
      "rare", "species with enlarged-sample frequency <= tau");
  sp_rare->fallthrough();
  std::int64_t rare_m = 0, rare_tau = 0;
  sp_rare->add_option("--m", rare_m)->required();
  sp_rare->add_option("--tau", rare_tau)->required();
  auto* sp_freq = species->add_subcommand(
      "freq", "expected species count at a given enlarged-sample frequency");
  sp_freq->fallthrough();
  std::string freq_kind;
  std::int64_t freq_m = 0, freq_i = 0;
  sp_freq->add_option("--kind", freq_kind, "new|old")->required();
  sp_freq->add_option("--m", freq_m)->required();
  sp_freq->add_option("--i", freq_i)->required();
  auto* sp_disc =
      species->add_subcommand("discovery", "discovery probability");
  sp_disc->fallthrough();
  std::int64_t disc_m = 0, disc_i = 0;
  bool disc_curve = false;
  std::string disc_out;
  sp_disc->add_option("--m", disc_m, "0 = current sample")->required();
  sp_disc->add_option("--i", disc_i, "current frequency (0 = new species)");
  sp_disc->add_flag("--curve", disc_curve, "CSV curve m=1..M");
  sp_disc->add_option("--out", disc_out, "CSV path for --curve");

  // eb-fit
  auto* eb = app.add_subcommand("eb-fit", "Empirical Bayes parameter fit");
  eb->fallthrough();
  std::string eb_family;
  SpeciesArgs eba;
  eb->add_option("--family", eb_family, "dp|py|ngg")->required();
  eb->add_option("--data", eba.data)->required();
  eb->add_flag("--labels", eba.labels);

  // mixture
  auto* mixture = app.add_subcommand("mixture", "Gaussian mixture MCMC");
  mixture->fallthrough();
  mixture->require_subcommand(1);
  auto* mix_fit = mixture->add_subcommand("fit", "run the sampler");
  mix_fit->fallthrough();
  MixtureCliArgs ma;
  mix_fit->add_option("--model", ma.model_spec)->required();
  mix_fit->add_option("--data", ma.data, "one numeric value per line");
  mix_fit->add_option("--toy-seed", ma.toy_seed,
                      "draw the bundled bimodal toy data instead");
  mix_fit->add_option("--iters", ma.iters);
  mix_fit->add_option("--burnin", ma.burnin);
  mix_fit->add_option("--thinning", ma.thinning);
  mix_fit->add_option("--aux", ma.aux, "auxiliary components");
  mix_fit->add_option("--mu0", ma.mu0);
  mix_fit->add_option("--mu-var", ma.mu_var);
  mix_fit->add_option("--out", ma.out, "cluster-count pmf CSV");
  mix_fit->add_option("--density-out", ma.density_out,
                      "predictive density CSV");
  mix_fit->add_option("--grid", ma.grid, "density grid lo:hi:step");

  // consistency
  auto* cons = app.add_subcommand(
      "consistency", "New-value probability trajectories and tail checks");
  cons->fallthrough();
  std::string cons_model, cons_regime = "diffuse", cons_tails, cons_out;
  std::int64_t cons_nmax = 10000, cons_mmax = 1000;
  int cons_seeds = 1;
  cons->add_option("--model", cons_model);
  cons->add_option("--regime", cons_regime,
                   "diffuse | uniform:N | geometric:q");
  cons->add_option("--nmax", cons_nmax);
  cons->add_option("--seeds", cons_seeds,
                   "average over this many paths (discrete regimes)");
  cons->add_option("--tails", cons_tails,
                   "check T1/T2 for a mixing pmf kind:params");
  cons->add_option("--mmax", cons_mmax, "tail-check window");
  cons->add_option("--out", cons_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("usage", e.what());
    return 2;
  }

  try {
    if (*eppf) return run_eppf(eppf_model, eppf_sizes);
    if (*predict) return run_predict(pred_model, pred_sizes);
    if (*kn) return run_kn(kn_model, kn_n, kn_out);
    if (*elicit) return run_elicit(el_family, el_sigma, el_n, el_target);
    if (*sp_km) return run_species_km(sa, km_m, km_level, km_curve, km_out, seed);
    if (*sp_rare) return run_species_rare(sa, rare_m, rare_tau);
    if (*sp_freq) return run_species_freq(sa, freq_kind, freq_m, freq_i);
    if (*sp_disc)
      return run_species_discovery(sa, disc_m, disc_i, disc_curve, disc_out);
    if (*eb) return run_eb_fit(eb_family, eba);
    if (*mix_fit) return run_mixture_fit(ma, seed);
    if (*cons)
      return run_consistency(cons_model, cons_regime, cons_nmax, cons_seeds,
                             cons_tails, cons_mmax, cons_out, seed, threads);
  } catch (const gibbs::NumericError& e) {
    emit_error("numeric", e.what());
    return 4;
  } catch (const gibbs::Error& e) {
    emit_error("data", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("numeric", e.what());
    return 4;
  }
  emit_error("usage", "no subcommand");
  return 2;
}
