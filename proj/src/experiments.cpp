// SPDX-License-Identifier: Apache-2.0
#include "obr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "obr/csvplot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace obr {

void ExperimentConfig::validate() const {
  if (m == 0 || m > 6) throw ConfigError("config: m must be in 1..6");
  if (p == 0) throw ConfigError("config: p must be >= 1");
  if (n == 0) throw ConfigError("config: n must be >= 1");
  if (alpha < 0.0) throw ConfigError("config: alpha must be nonnegative");
  for (double r : rho)
    if (r < 0.0) throw ConfigError("config: rho entries must be nonnegative");
  if (rho.empty()) throw ConfigError("config: rho list is empty");
  if (snr_db.empty()) throw ConfigError("config: snr_db list is empty");
  if (n_trials == 0) throw ConfigError("config: n_trials must be >= 1");
  if (n_draws == 0) throw ConfigError("config: K must be >= 1");
  if (gamma_points < 2) throw ConfigError("config: gamma_points must be >= 2");
  if (!(pfa_min > 0.0 && pfa_min < 1.0))
    throw ConfigError("config: pfa_min must lie in (0,1)");
  if (!(tables_tol > 0.0)) throw ConfigError("config: tables_tol must be > 0");
  // n1/n2/splits describe training windows; only the training runner
  // consumes them, so their consistency with n is checked there.
  if (output_dir.empty()) throw ConfigError("config: output_dir is empty");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config: parse failure in '" + path + "': " + e.what());
  }

  ExperimentConfig cfg;
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "m") cfg.m = val.get<std::size_t>();
      else if (key == "p") cfg.p = val.get<std::size_t>();
      else if (key == "n") cfg.n = val.get<std::size_t>();
      else if (key == "phi") cfg.phi = val.get<double>();
      else if (key == "theta") cfg.theta = val.get<double>();
      else if (key == "alpha") cfg.alpha = val.get<double>();
      else if (key == "rho") cfg.rho = val.get<Vec>();
      else if (key == "snr_db") cfg.snr_db = val.get<Vec>();
      else if (key == "n_trials") cfg.n_trials = val.get<std::size_t>();
      else if (key == "K") cfg.n_draws = val.get<std::size_t>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "n1") cfg.n1 = val.get<std::size_t>();
      else if (key == "n2") cfg.n2 = val.get<std::size_t>();
      else if (key == "splits") {
        cfg.splits.clear();
        for (const auto& s : val) {
          if (!s.is_array() || s.size() != 2)
            throw ConfigError("config: splits entries must be [n1, n2] pairs");
          cfg.splits.emplace_back(s[0].get<std::size_t>(),
                                  s[1].get<std::size_t>());
        }
      } else if (key == "output_dir") cfg.output_dir = val.get<std::string>();
      else if (key == "threads") cfg.threads = val.get<std::size_t>();
      else if (key == "gamma_points") cfg.gamma_points = val.get<std::size_t>();
      else if (key == "pfa_min") cfg.pfa_min = val.get<double>();
      else if (key == "tables_tol") cfg.tables_tol = val.get<double>();
      else if (key == "tables_cache") cfg.tables_cache = val.get<std::string>();
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value in '" + path + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_json(const ExperimentConfig& cfg) {
  json j;
  j["m"] = cfg.m;
  j["p"] = cfg.p;
  j["n"] = cfg.n;
  j["phi"] = cfg.phi;
  j["theta"] = cfg.theta;
  j["alpha"] = cfg.alpha;
  j["rho"] = cfg.rho;
  j["snr_db"] = cfg.snr_db;
  j["n_trials"] = cfg.n_trials;
  j["K"] = cfg.n_draws;
  j["seed"] = cfg.seed;
  j["n1"] = cfg.n1;
  j["n2"] = cfg.n2;
  json sp = json::array();
  for (const auto& [a, b] : cfg.splits) sp.push_back({a, b});
  j["splits"] = sp;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["gamma_points"] = cfg.gamma_points;
  j["pfa_min"] = cfg.pfa_min;
  j["tables_tol"] = cfg.tables_tol;
  j["tables_cache"] = cfg.tables_cache;
  return j.dump(2) + "\n";
}

void save_resolved_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("config: cannot write '" + path + "'");
  f << config_json(cfg);
}

Vec linspace(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw InvalidArgument("linspace: bad range");
  Vec out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(count - 1);
  return out;
}

Vec log_pfa_grid(double pfa_min, std::size_t count) {
  if (!(pfa_min > 0.0 && pfa_min < 1.0) || count < 2)
    throw InvalidArgument("log_pfa_grid: bad range");
  const double e0 = std::log10(pfa_min);
  Vec out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, e0 * (1.0 - static_cast<double>(i) /
                                            static_cast<double>(count - 1)));
  out.back() = 1.0;
  return out;
}

NoiseTables cached_noise_tables(const Mat& coherence, double tol,
                                const std::string& cache_dir, RngStream rng) {
  if (cache_dir.empty()) return build_noise_tables(coherence, tol, rng);
  char name[64];
  std::snprintf(name, sizeof(name), "tables_m%zu_%016llx.json",
                coherence.rows() / 2,
                static_cast<unsigned long long>(coherence_key(coherence)));
  const fs::path path = fs::path(cache_dir) / name;
  if (fs::exists(path)) {
    try {
      return load_noise_tables(path.string());
    } catch (const ConfigError&) {
      // stale or foreign file, rebuild below
    }
  }
  NoiseTables t = build_noise_tables(coherence, tol, rng);
  fs::create_directories(cache_dir);
  save_noise_tables(t, path.string());
  return t;
}

namespace {

std::size_t resolve_threads(std::size_t requested) {
  if (requested) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, const Fn& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = count * t / threads;
    const std::size_t hi = count * (t + 1) / threads;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

// Per-snapshot composite means for x_l = beta w_l + n_l.
Mat mean_matrix(const CMat& w, cplx beta) {
  const std::size_t m = w.rows(), n = w.cols();
  Mat out(n, 2 * m);
  CVec col(m);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < m; ++i) col[i] = w(i, l);
    const Vec mu = composite_mean(col, beta);
    for (std::size_t t = 0; t < 2 * m; ++t) out(l, t) = mu[t];
  }
  return out;
}

void check_tables(const std::vector<const DetectorTables*>& tables,
                  const CMat& w) {
  if (tables.empty()) throw InvalidArgument("simulate: no detector tables");
  for (const DetectorTables* t : tables) {
    if (!t) throw InvalidArgument("simulate: null table pointer");
    if (t->m != w.rows() || t->n != w.cols())
      throw InvalidArgument("simulate: tables do not match the scenario");
  }
}

// Scores all tables on one synthesized trial. z holds n*2m standard
// normals, y is scratch of width 2m.
void score_trial(const std::vector<const DetectorTables*>& tables,
                 const Mat& means, const Mat& chol, const double* z, double* y,
                 double* w1, double* w2) {
  const std::size_t n = means.rows(), k = means.cols();
  for (std::size_t t = 0; t < tables.size(); ++t) w1[t] = w2[t] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double* zl = z + l * k;
    std::uint32_t idx = 0;
    for (std::size_t r = 0; r < k; ++r) {
      double acc = means(l, r);
      const double* row = chol.row(r);
      for (std::size_t c = 0; c <= r; ++c) acc += row[c] * zl[c];
      y[r] = acc;
      idx = (idx << 1) | (acc >= 0.0 ? 1u : 0u);
    }
    for (std::size_t t = 0; t < tables.size(); ++t) {
      w1[t] += tables[t]->score1(l, idx);
      w2[t] += tables[t]->score2(l, idx);
    }
  }
}

std::vector<Vec> simulate_impl(const std::vector<const DetectorTables*>& tables,
                               const CMat& w, const CompositeCovariance* fixed,
                               const TruthFactory* factory, cplx beta,
                               std::size_t n_trials, std::uint64_t seed,
                               std::uint64_t stream_offset,
                               std::size_t threads) {
  check_tables(tables, w);
  const std::size_t n = w.cols(), k = 2 * w.rows();
  const Mat means = mean_matrix(w, beta);
  Mat chol_fixed;
  if (fixed) chol_fixed = cholesky_jittered(fixed->sigma);

  std::vector<Vec> out(tables.size(), Vec(n_trials));
  parallel_for(n_trials, resolve_threads(threads),
               [&](std::size_t lo, std::size_t hi) {
                 Vec z(n * k), y(k), w1(tables.size()), w2(tables.size());
                 for (std::size_t trial = lo; trial < hi; ++trial) {
                   RngStream rng(seed, streams::tag(streams::kTrials,
                                                    stream_offset + trial));
                   rng.fill_normal(z);
                   const Mat* chol = &chol_fixed;
                   Mat chol_local;
                   if (factory) {
                     RngStream fr(seed,
                                  streams::tag(streams::kPrior,
                                               (1ull << 40) + stream_offset +
                                                   trial));
                     const CompositeCovariance truth = (*factory)(trial, fr);
                     if (truth.half() * 2 != k)
                       throw InvalidArgument(
                           "simulate: factory covariance has wrong size");
                     chol_local = cholesky_jittered(truth.sigma);
                     chol = &chol_local;
                   }
                   score_trial(tables, means, *chol, z.data(), y.data(),
                               w1.data(), w2.data());
                   for (std::size_t t = 0; t < tables.size(); ++t)
                     out[t][trial] = w1[t] * w1[t] + w2[t] * w2[t];
                 }
               });
  return out;
}

}  // namespace

std::vector<Vec> simulate_statistics(
    const std::vector<const DetectorTables*>& tables, const CMat& w,
    const CompositeCovariance& truth, cplx beta, std::size_t n_trials,
    std::uint64_t seed, std::uint64_t stream_offset, std::size_t threads) {
  return simulate_impl(tables, w, &truth, nullptr, beta, n_trials, seed,
                       stream_offset, threads);
}

std::vector<Vec> simulate_statistics_varying(
    const std::vector<const DetectorTables*>& tables, const CMat& w,
    const TruthFactory& truth, cplx beta, std::size_t n_trials,
    std::uint64_t seed, std::uint64_t stream_offset, std::size_t threads) {
  return simulate_impl(tables, w, nullptr, &truth, beta, n_trials, seed,
                       stream_offset, threads);
}

namespace {

// Shared state every runner starts from.
struct Setup {
  ExperimentConfig cfg;
  CMat sigma;
  Scenario sc;
  NoiseTables noise;
  DetectorTables det;
};

Setup make_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  Setup s;
  s.cfg = cfg;
  RngStream cov_rng(cfg.seed, streams::tag(streams::kNoiseCov));
  s.sigma = random_noise_cov(cfg.m, cfg.alpha, cov_rng);
  s.sc = make_scenario(cfg.m, cfg.p, cfg.n, cfg.phi, cfg.theta, s.sigma);
  s.noise = cached_noise_tables(s.sc.comp.c, cfg.tables_tol, cfg.tables_cache,
                                RngStream(cfg.seed, streams::tag(streams::kTables)));
  s.det = build_detector_tables(s.sc, s.sc.comp, s.noise);
  fs::create_directories(cfg.output_dir);
  return s;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& stem,
                     const std::string& ext) {
  return (fs::path(cfg.output_dir) / (stem + ext)).string();
}

std::string number_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double exceedance(const Vec& stats, double gamma) {
  std::size_t hits = 0;
  for (double t : stats) hits += t > gamma;
  return static_cast<double>(hits) / static_cast<double>(stats.size());
}

// 3-sigma binomial band around an empirical rate.
std::pair<double, double> binomial_band(double p_hat, std::size_t n) {
  const double s = 3.0 * std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) /
                                   static_cast<double>(n));
  return {std::max(0.0, p_hat - s), std::min(1.0, p_hat + s)};
}

// Empirical threshold giving the requested false alarm rate, then the
// detection rate of h1 over that threshold.
Vec roc_pd(const Vec& h0, const Vec& h1, const Vec& pfa_grid) {
  Vec sorted = h0;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Vec pd(pfa_grid.size());
  for (std::size_t i = 0; i < pfa_grid.size(); ++i) {
    // unit pfa is the always-declare endpoint, not a data-driven threshold
    if (pfa_grid[i] >= 1.0) {
      pd[i] = 1.0;
      continue;
    }
    const double want = pfa_grid[i] * static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::floor(want + 0.5));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    const double thr = sorted[rank - 1];
    double hits = 0;
    for (double t : h1) hits += t >= thr;
    pd[i] = hits / static_cast<double>(h1.size());
  }
  return pd;
}

Vec log10_of(const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log10(v[i]);
  return out;
}

CompositeCovariance fixed_perturbed(const Setup& s, double rho,
                                    std::size_t rho_idx) {
  if (rho == 0.0) return s.sc.comp;
  RngStream rng(s.cfg.seed, streams::tag(streams::kPerturb, rho_idx));
  return complex_to_composite(perturb_cov(s.sigma, rho, rng));
}

// Orthant tolerance for per-run analysis quantities; tables keep the tighter
// configured value, the analysis layers do not need it.
double analysis_tol(const ExperimentConfig& cfg) {
  return std::max(cfg.tables_tol, 1e-6);
}

}  // namespace

std::vector<std::string> run_pfa(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  save_resolved_config(cfg, out_path(cfg, "pfa_config", ".json"));
  std::vector<std::string> written;

  for (std::size_t ri = 0; ri < cfg.rho.size(); ++ri) {
    const double rho = cfg.rho[ri];
    const CompositeCovariance truth = fixed_perturbed(s, rho, ri);
    double ratio = 1.0;
    MismatchAnalysis mm;
    if (rho > 0.0) {
      mm = analyze_mismatch(s.det, truth, analysis_tol(cfg),
                            RngStream(cfg.seed, streams::tag(streams::kAnalysis, ri)));
      ratio = mm.upsilon1_sq / mm.upsilon_sq;
    }
    const Vec gammas = linspace(0.0, -2.0 * std::log(cfg.pfa_min) *
                                          std::max(1.0, ratio),
                                cfg.gamma_points);
    const std::vector<Vec> stats = simulate_statistics(
        {&s.det}, s.sc.w, truth, 0.0, cfg.n_trials, cfg.seed,
        ri * cfg.n_trials, cfg.threads);

    CsvTable table;
    table.columns = {"gamma", "pfa_theory", "pfa_empirical", "ci_low", "ci_high"};
    for (double g : gammas) {
      const double theory = rho > 0.0
                                ? pfa_mismatched(g, mm.upsilon_sq, mm.upsilon1_sq)
                                : (g <= 0.0 ? 1.0 : std::exp(-0.5 * g));
      const double emp = exceedance(stats[0], g);
      const auto [lo, hi] = binomial_band(emp, cfg.n_trials);
      table.rows.push_back({g, theory, emp, lo, hi});
    }
    const std::string stem = "pfa_rho" + number_tag(rho);
    write_csv(out_path(cfg, stem, ".csv"), table);
    write_svg_plot(out_path(cfg, stem, ".svg"),
                   {{"theory", table.column("gamma"), table.column("pfa_theory")},
                    {"empirical", table.column("gamma"),
                     table.column("pfa_empirical")}},
                   {"False alarm rate, rho = " + number_tag(rho), "threshold",
                    "Pfa", true});
    written.push_back(out_path(cfg, stem, ".csv"));
  }
  return written;
}

std::vector<std::string> run_avg_pfa(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  save_resolved_config(cfg, out_path(cfg, "avg_pfa_config", ".json"));
  std::vector<std::string> written;
  const Vec gammas = linspace(0.0, -2.0 * std::log(cfg.pfa_min), cfg.gamma_points);

  for (std::size_t ri = 0; ri < cfg.rho.size(); ++ri) {
    const double rho = cfg.rho[ri];
    const PriorSampler prior = [&s, rho](RngStream& r) {
      return perturb_cov(s.sigma, rho, r);
    };
    const Vec taylor =
        avg_pfa(gammas, s.det, prior, cfg.n_draws, AvgPfaMode::taylor,
                analysis_tol(cfg),
                RngStream(cfg.seed, streams::tag(streams::kPrior, 2 * ri)));
    const Vec direct =
        avg_pfa(gammas, s.det, prior, cfg.n_draws, AvgPfaMode::direct,
                analysis_tol(cfg),
                RngStream(cfg.seed, streams::tag(streams::kPrior, 2 * ri + 1)));

    const TruthFactory factory = [&s, rho](std::size_t, RngStream& r) {
      return complex_to_composite(perturb_cov(s.sigma, rho, r));
    };
    const std::vector<Vec> stats = simulate_statistics_varying(
        {&s.det}, s.sc.w, factory, 0.0, cfg.n_trials, cfg.seed,
        ri * cfg.n_trials, cfg.threads);

    CsvTable table;
    table.columns = {"gamma", "pfa_taylor", "pfa_direct", "pfa_empirical"};
    for (std::size_t g = 0; g < gammas.size(); ++g)
      table.rows.push_back(
          {gammas[g], taylor[g], direct[g], exceedance(stats[0], gammas[g])});
    const std::string stem = "avg_pfa_rho" + number_tag(rho);
    write_csv(out_path(cfg, stem, ".csv"), table);
    write_svg_plot(
        out_path(cfg, stem, ".svg"),
        {{"taylor", gammas, table.column("pfa_taylor")},
         {"direct", gammas, table.column("pfa_direct")},
         {"empirical", gammas, table.column("pfa_empirical")}},
        {"Average false alarm rate, rho = " + number_tag(rho), "threshold",
         "Pfa", true});
    written.push_back(out_path(cfg, stem, ".csv"));
  }
  return written;
}

std::vector<std::string> run_pd(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  save_resolved_config(cfg, out_path(cfg, "pd_config", ".json"));
  std::vector<std::string> written;
  const Vec gammas = linspace(0.0, -2.0 * std::log(cfg.pfa_min), cfg.gamma_points);
  std::uint64_t block = 0;

  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double beta = beta_for_snr(s.sigma, cfg.p, cfg.snr_db[si]);
    for (std::size_t ri = 0; ri < cfg.rho.size(); ++ri) {
      const double rho = cfg.rho[ri];
      const bool matched = rho == 0.0;
      const CompositeCovariance truth = fixed_perturbed(s, rho, ri);
      RngStream arng(cfg.seed,
                     streams::tag(streams::kAnalysis, 100 + 10 * si + ri));
      const NonNullMoments mom = non_null_moments(
          s.det, beta, matched ? nullptr : &truth, analysis_tol(cfg), arng);
      MismatchAnalysis mm;
      if (!matched)
        mm = analyze_mismatch(s.det, truth, analysis_tol(cfg),
                              RngStream(cfg.seed,
                                        streams::tag(streams::kAnalysis, ri)));
      const std::vector<Vec> stats = simulate_statistics(
          {&s.det}, s.sc.w, truth, beta, cfg.n_trials, cfg.seed,
          (block++) * cfg.n_trials, cfg.threads);

      CsvTable table;
      table.columns = {"gamma", "pd_exact", "pd_low_snr", "pd_empirical"};
      for (double g : gammas) {
        const double exact = pd_exact(g, mom);
        const double low = matched ? pd_low_snr(g, s.det, beta)
                                   : pd_low_snr_mismatched(g, mm, beta);
        table.rows.push_back({g, exact, low, exceedance(stats[0], g)});
      }
      const std::string stem =
          "pd_snr" + number_tag(cfg.snr_db[si]) +
          (matched ? std::string() : "_rho" + number_tag(rho));
      write_csv(out_path(cfg, stem, ".csv"), table);
      write_svg_plot(out_path(cfg, stem, ".svg"),
                     {{"exact", gammas, table.column("pd_exact")},
                      {"low-SNR", gammas, table.column("pd_low_snr")},
                      {"empirical", gammas, table.column("pd_empirical")}},
                     {"Detection rate, SNR = " + number_tag(cfg.snr_db[si]) +
                          " dB" + (matched ? "" : ", rho = " + number_tag(rho)),
                      "threshold", "Pd", false});
      written.push_back(out_path(cfg, stem, ".csv"));
    }
  }
  return written;
}

std::vector<std::string> run_roc(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  save_resolved_config(cfg, out_path(cfg, "roc_config", ".json"));
  std::vector<std::string> written;
  const DetectorTables white = white_detector_tables(s.sc);
  const double beta = beta_for_snr(s.sigma, cfg.p, cfg.snr_db.front());
  const Vec pfa_grid = log_pfa_grid(cfg.pfa_min, cfg.gamma_points);
  std::uint64_t block = 0;

  for (std::size_t ri = 0; ri < cfg.rho.size(); ++ri) {
    const double rho = cfg.rho[ri];
    const CompositeCovariance truth = fixed_perturbed(s, rho, ri);
    const std::vector<Vec> h0 = simulate_statistics(
        {&s.det, &white}, s.sc.w, truth, 0.0, cfg.n_trials, cfg.seed,
        (block++) * cfg.n_trials, cfg.threads);
    const std::vector<Vec> h1 = simulate_statistics(
        {&s.det, &white}, s.sc.w, truth, beta, cfg.n_trials, cfg.seed,
        (block++) * cfg.n_trials, cfg.threads);
    const Vec pd_prop = roc_pd(h0[0], h1[0], pfa_grid);
    const Vec pd_white = roc_pd(h0[1], h1[1], pfa_grid);

    CsvTable table;
    table.columns = {"pfa", "pd_proposed", "pd_white"};
    for (std::size_t i = 0; i < pfa_grid.size(); ++i)
      table.rows.push_back({pfa_grid[i], pd_prop[i], pd_white[i]});
    const std::string stem = "roc_rho" + number_tag(rho);
    write_csv(out_path(cfg, stem, ".csv"), table);
    write_svg_plot(out_path(cfg, stem, ".svg"),
                   {{"proposed", log10_of(pfa_grid), pd_prop},
                    {"white baseline", log10_of(pfa_grid), pd_white}},
                   {"ROC, rho = " + number_tag(rho) + ", SNR = " +
                        number_tag(cfg.snr_db.front()) + " dB",
                    "log10 Pfa", "Pd", false});
    written.push_back(out_path(cfg, stem, ".csv"));
  }
  return written;
}

std::vector<std::string> run_training(const ExperimentConfig& cfg) {
  // An empty splits list means the single n1:n2 partition.
  const auto splits = cfg.splits.empty()
                          ? std::vector<std::pair<std::size_t, std::size_t>>{
                                {cfg.n1, cfg.n2}}
                          : cfg.splits;
  for (const auto& [a, b] : splits) {
    if (a + b != cfg.n)
      throw ConfigError("training: every split must sum to n");
    if (a < 2 || b < 1) throw ConfigError("training: split windows too short");
  }

  const Setup s = make_setup(cfg);
  save_resolved_config(cfg, out_path(cfg, "training_config", ".json"));
  const double beta_full = beta_for_snr(s.sigma, cfg.p, cfg.snr_db.front());
  const Vec pfa_grid = log_pfa_grid(cfg.pfa_min, cfg.gamma_points);
  std::uint64_t block = 0;

  // The white detector needs no training, so it sees the whole interval.
  const DetectorTables white = white_detector_tables(s.sc);
  const std::vector<Vec> h0w = simulate_statistics(
      {&white}, s.sc.w, s.sc.comp, 0.0, cfg.n_trials, cfg.seed,
      (block++) * cfg.n_trials, cfg.threads);
  const std::vector<Vec> h1w = simulate_statistics(
      {&white}, s.sc.w, s.sc.comp, beta_full, cfg.n_trials, cfg.seed,
      (block++) * cfg.n_trials, cfg.threads);
  const Vec pd_white = roc_pd(h0w[0], h1w[0], pfa_grid);

  CsvTable table;
  table.columns = {"n1", "n2", "pfa_grid", "pd_proposed", "pd_white",
                   "pd_known_cov"};
  std::vector<PlotSeries> series;

  for (std::size_t sp = 0; sp < splits.size(); ++sp) {
    const auto [n1, n2] = splits[sp];
    // Training window: noise-only one-bit snapshots, one draw per split.
    Scenario train = make_scenario(cfg.m, cfg.p, n1, cfg.phi, cfg.theta, s.sigma);
    RngStream trng(cfg.seed, streams::tag(streams::kScenario, sp));
    const QuantizedData qd = simulate_quantized(train, 0.0, trng);
    const CompositeCovariance est = estimate_composite_one_bit(qd);
    const NoiseTables est_noise =
        build_noise_tables(est.c, cfg.tables_tol,
                           RngStream(cfg.seed, streams::tag(streams::kTables, 1 + sp)));

    // Detection window: transmitted energy matches the full-interval budget.
    const Scenario det_sc =
        make_scenario(cfg.m, cfg.p, n2, cfg.phi, cfg.theta, s.sigma);
    const double beta2 =
        beta_full * std::sqrt(static_cast<double>(cfg.n) / static_cast<double>(n2));
    const DetectorTables det_est = build_detector_tables(det_sc, est, est_noise);
    const DetectorTables det_known =
        build_detector_tables(det_sc, det_sc.comp, s.noise);

    const std::vector<Vec> h0 = simulate_statistics(
        {&det_est, &det_known}, det_sc.w, det_sc.comp, 0.0, cfg.n_trials,
        cfg.seed, (block++) * cfg.n_trials, cfg.threads);
    const std::vector<Vec> h1 = simulate_statistics(
        {&det_est, &det_known}, det_sc.w, det_sc.comp, beta2, cfg.n_trials,
        cfg.seed, (block++) * cfg.n_trials, cfg.threads);
    const Vec pd_est = roc_pd(h0[0], h1[0], pfa_grid);
    const Vec pd_known = roc_pd(h0[1], h1[1], pfa_grid);

    for (std::size_t i = 0; i < pfa_grid.size(); ++i)
      table.rows.push_back({static_cast<double>(n1), static_cast<double>(n2),
                            pfa_grid[i], pd_est[i], pd_white[i], pd_known[i]});
    series.push_back({"trained [" + std::to_string(n1) + ", " +
                          std::to_string(n2) + "]",
                      log10_of(pfa_grid), pd_est});
  }
  series.push_back({"white, full interval", log10_of(pfa_grid), pd_white});

  write_csv(out_path(cfg, "training", ".csv"), table);
  write_svg_plot(out_path(cfg, "training", ".svg"), series,
                 {"Training length study, SNR = " +
                      number_tag(cfg.snr_db.front()) + " dB",
                  "log10 Pfa", "Pd", false});
  return {out_path(cfg, "training", ".csv")};
}

}  // namespace obr
